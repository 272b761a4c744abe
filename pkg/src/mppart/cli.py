"""Command line front end.

Subcommands: partition, generate, suite, verify.  Exit codes: 0 on success,
1 when the only results are infeasible (or verification fails), 2 on bad
usage or unreadable input.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .generator import PRESETS, BenchmarkProfile, ProfileError, generate, preset_profile
from .graph import ConstraintSet, GraphError
from .metrics import auto_capacities, score_partition
from .mphio import MphError, read_mph, write_mph
from .oracle import OracleError, oracle_partition
from .strategies import (
    STRATEGY_KINDS,
    StrategyConfig,
    StrategyReport,
    aggregate,
    resolve_constraints,
    run_strategy,
)

CSV_COLUMNS = ("benchmark", "strategy", "cut", "norm_cut_vs_sm", "rur_dev", "time_norm")


def _parse_ratio(text, r_count: int, parser):
    if text is None:
        return (1.0,) * r_count
    parts = text.split(":")
    if len(parts) != r_count:
        parser.error(f"--target-ratio needs {r_count} colon-separated values, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        parser.error(f"--target-ratio values must be numeric, got {text!r}")
    if any(v <= 0 for v in vals):
        parser.error("--target-ratio values must be > 0")
    low = min(vals)
    return tuple(v / low for v in vals)


def _parse_capacities(text: str, r_count: int, parser):
    parts = text.split(":")
    if len(parts) != r_count:
        parser.error(f"--capacities needs {r_count} colon-separated values, got {text!r}")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        parser.error(f"--capacities values must be integers, got {text!r}")
    if any(v <= 0 for v in vals):
        parser.error("--capacities values must be > 0")
    return tuple(vals)


def _check_margin(value: float, parser):
    if not (0.0 < value <= 1.0):
        parser.error("--imbalance must be in (0, 1]")
    return value


def _load_graph(path: str, parser):
    try:
        return read_mph(path)
    except (OSError, MphError, GraphError) as exc:
        parser.error(f"cannot read {path}: {exc}")


def report_as_dict(name: str, report: StrategyReport) -> dict:
    cfg = report.config
    cons = report.constraints
    return {
        "benchmark": name,
        "strategy": report.kind,
        "config": {
            "runs": cfg.runs,
            "imbalance": cfg.margin,
            "target_ratio": list(cons.target_rur),
            "capacities": list(cons.capacities),
            "seed": cfg.seed,
            "max_passes": cfg.max_passes,
            "coarsest_size": cfg.coarsest_size,
            "relax_coarse": cfg.relax_coarse,
            "relax_shape": cfg.relax_shape,
        },
        "runs": [
            {
                "seed": r.seed,
                "cut": r.cut,
                "feasible": r.feasible,
                "per_resource_imbalance": list(r.per_resource),
                "rur_deviation": r.rur,
                "wall_ms": r.wall_ms,
            }
            for r in report.runs
        ],
        "best_run_index": report.best_index,
        "infeasible": report.infeasible,
        "best": {
            "cut": report.best.cut,
            "feasible": report.best.feasible,
            "rur_deviation": report.best.rur,
            "max_violation": report.best.max_violation,
            "side": list(report.best_side),
            "selected": list(report.best_selected),
            "totals": [list(report.best_totals[0]), list(report.best_totals[1])],
        },
        "norm": {
            "cut": report.best.cut,
            "rur_dev": report.best.rur,
            "wall_ms_total": report.total_wall_ms,
        },
    }


def _write_csv(path: str, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)


def cmd_partition(args, parser) -> int:
    graph = _load_graph(args.input, parser)
    margin = _check_margin(args.imbalance, parser)
    target = _parse_ratio(args.target_ratio, graph.resource_count, parser)
    caps = (_parse_capacities(args.capacities, graph.resource_count, parser)
            if args.capacities else None)
    config = StrategyConfig(kind=args.strategy, runs=args.runs, margin=margin,
                            target_rur=target, capacities=caps, seed=args.seed)
    report = run_strategy(graph, config)
    name = Path(args.input).stem
    doc = report_as_dict(name, report)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.csv:
        best = report.best
        norm = "1.0" if report.kind == "sm" else ""
        _write_csv(args.csv, [(name, report.kind, best.cut, norm,
                               f"{best.rur:.6f}", norm)])
    best = report.best
    status = "feasible" if best.feasible else "INFEASIBLE"
    print(f"{name} {report.kind}: best cut {best.cut} ({status}), "
          f"rur deviation {best.rur:.4f}, {len(report.runs)} runs")
    return 1 if report.infeasible else 0


def cmd_generate(args, parser) -> int:
    try:
        if args.preset:
            profile = preset_profile(args.preset, args.nodes, seed=args.seed)
        else:
            if not args.fractions:
                parser.error("generate needs --preset or --fractions")
            parts = args.fractions.split(":")
            try:
                fractions = tuple(float(p) for p in parts)
            except ValueError:
                parser.error(f"--fractions values must be numeric, got {args.fractions!r}")
            profile = BenchmarkProfile(node_count=args.nodes, fractions=fractions,
                                       mode=args.mode, seed=args.seed,
                                       name=Path(args.output).stem)
        graph = generate(profile)
    except (ProfileError, GraphError, ValueError) as exc:
        parser.error(str(exc))
    write_mph(graph, args.output)
    print(f"wrote {args.output}: {graph.num_nodes} nodes, {graph.num_edges} edges, "
          f"{graph.resource_count} resources")
    return 0


def cmd_suite(args, parser) -> int:
    margin = _check_margin(args.imbalance, parser)
    kinds = args.strategies.split(",") if args.strategies else list(STRATEGY_KINDS)
    for k in kinds:
        if k not in STRATEGY_KINDS:
            parser.error(f"unknown strategy {k!r}")
    if "sm" not in kinds:
        parser.error("suite needs the sm baseline strategy")
    paths = sorted(Path(args.dir).glob("*.mph"))
    if not paths:
        parser.error(f"no .mph files in {args.dir}")
    all_reports: dict[str, dict[str, StrategyReport]] = {}
    for path in paths:
        graph = _load_graph(str(path), parser)
        name = path.stem
        per_bench = {}
        for kind in kinds:
            config = StrategyConfig(kind=kind, runs=args.runs, margin=margin,
                                    seed=args.seed)
            per_bench[kind] = run_strategy(graph, config)
        all_reports[name] = per_bench

    rows = []
    for name, per_bench in all_reports.items():
        sm = per_bench["sm"]
        sm_cut = max(sm.best.cut, 1)
        sm_ms = max(sm.total_wall_ms, 1e-9)
        for kind in kinds:
            rep = per_bench[kind]
            rows.append((name, kind, rep.best.cut,
                         f"{max(rep.best.cut, 1) / sm_cut:.6f}",
                         f"{rep.best.rur:.6f}",
                         f"{rep.total_wall_ms / sm_ms:.4f}"))
    summary = aggregate(all_reports)
    for row in summary:
        rows.append(("GEOMEAN", row.kind, "",
                     f"{row.geomean_cut_norm:.6f}",
                     f"{row.geomean_rur:.6f}",
                     f"{row.mean_time_norm:.4f}"))
    if args.output:
        _write_csv(args.output, rows)
    if args.json:
        doc = {name: {kind: report_as_dict(name, rep)
                      for kind, rep in per_bench.items()}
               for name, per_bench in all_reports.items()}
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    header = f"{'strategy':<10} {'cut_norm':>9} {'rur_dev':>9} {'time_norm':>10}"
    print(header)
    for row in summary:
        flag = " (infeasible runs)" if row.any_infeasible else ""
        print(f"{row.kind:<10} {row.geomean_cut_norm:>9.4f} {row.geomean_rur:>9.4f} "
              f"{row.mean_time_norm:>10.3f}{flag}")
    any_infeasible = any(rep.infeasible for per_bench in all_reports.values()
                         for rep in per_bench.values())
    return 1 if any_infeasible else 0


def cmd_verify(args, parser) -> int:
    graph = _load_graph(args.input, parser)
    margin = _check_margin(args.imbalance, parser)
    target = _parse_ratio(args.target_ratio, graph.resource_count, parser)
    caps = (_parse_capacities(args.capacities, graph.resource_count, parser)
            if args.capacities else auto_capacities(graph))
    constraints = ConstraintSet(margins=(margin,) * graph.resource_count,
                                target_rur=target, capacities=caps)
    try:
        opt = oracle_partition(graph, constraints)
    except OracleError as exc:
        parser.error(str(exc))
    config = StrategyConfig(kind=args.strategy, runs=args.runs, margin=margin,
                            target_rur=target, capacities=caps, seed=args.seed)
    report = run_strategy(graph, config)
    best = report.best
    if opt is None:
        print(f"oracle: no feasible partition; {args.strategy} best cut {best.cut} "
              f"({'feasible' if best.feasible else 'infeasible'})")
        if not report.infeasible:
            print("ERROR: strategy claims feasibility where the oracle finds none",
                  file=sys.stderr)
            return 1
        return 0
    print(f"oracle optimal cut {opt.cut}; {args.strategy} best cut {best.cut} "
          f"({'feasible' if best.feasible else 'INFEASIBLE'})")
    if not best.feasible:
        return 1
    if best.cut < opt.cut:
        print("ERROR: strategy reported a cut below the oracle optimum", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mppart",
                                     description="multilevel multi-personality "
                                                 "hypergraph bipartitioner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition one graph with one strategy")
    p.add_argument("--input", required=True)
    p.add_argument("--strategy", choices=STRATEGY_KINDS, default="dmp")
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--imbalance", type=float, default=0.01)
    p.add_argument("--target-ratio", default=None,
                   help="per-resource RUR targets, e.g. 1:1:1 (default uniform)")
    p.add_argument("--capacities", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None, help="JSON report path")
    p.add_argument("--csv", default=None, help="CSV row path")

    g = sub.add_parser("generate", help="generate a synthetic benchmark")
    g.add_argument("--preset", choices=sorted(PRESETS), default=None)
    g.add_argument("--nodes", type=int, default=2000)
    g.add_argument("--fractions", default=None,
                   help="per-resource touch fractions, e.g. 1.0:0.3:0.1")
    g.add_argument("--mode", choices=("uniform", "clustered"), default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", required=True)

    s = sub.add_parser("suite", help="run all strategies over a directory of graphs")
    s.add_argument("--dir", required=True)
    s.add_argument("--strategies", default=None,
                   help="comma-separated subset (must include sm)")
    s.add_argument("--runs", type=int, default=5)
    s.add_argument("--imbalance", type=float, default=0.01)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", default=None, help="CSV summary path")
    s.add_argument("--json", default=None, help="full JSON reports path")

    v = sub.add_parser("verify", help="cross-check a strategy against the oracle")
    v.add_argument("--input", required=True)
    v.add_argument("--strategy", choices=STRATEGY_KINDS, default="dmp")
    v.add_argument("--runs", type=int, default=10)
    v.add_argument("--imbalance", type=float, default=0.01)
    v.add_argument("--target-ratio", default=None,
                   help="per-resource RUR targets, e.g. 1:1:1 (default uniform)")
    v.add_argument("--capacities", default=None)
    v.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "partition":
        return cmd_partition(args, parser)
    if args.command == "generate":
        return cmd_generate(args, parser)
    if args.command == "suite":
        return cmd_suite(args, parser)
    return cmd_verify(args, parser)


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
