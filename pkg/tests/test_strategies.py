import math

import pytest

from mppart import (
    STRATEGY_KINDS,
    RunRecord,
    StrategyConfig,
    StrategyReport,
    aggregate,
    generate,
    preset_profile,
    recompute_state,
    remap_to_common_resource,
    run_strategy,
)
from mppart.strategies import prepare_inputs, resolve_constraints


@pytest.fixture(scope="module")
def small_bench():
    return generate(preset_profile("jet", 120, seed=6))


def test_config_validation():
    with pytest.raises(ValueError, match="unknown strategy"):
        StrategyConfig(kind="greedy")
    with pytest.raises(ValueError, match="runs"):
        StrategyConfig(runs=0)
    with pytest.raises(ValueError, match="margin"):
        StrategyConfig(margin=0.0)
    with pytest.raises(ValueError, match="margin"):
        StrategyConfig(margin=1.5)


@pytest.mark.parametrize("kind", STRATEGY_KINDS)
def test_all_kinds_run(small_bench, kind):
    config = StrategyConfig(kind=kind, runs=2, margin=0.25, seed=3)
    report = run_strategy(small_bench, config)
    assert report.kind == kind
    assert len(report.runs) == 2
    assert 0 <= report.best_index < 2
    assert report.infeasible == (not report.best.feasible)
    fresh = recompute_state(small_bench, list(report.best_side),
                            list(report.best_selected))
    assert fresh.cut == report.best.cut
    assert (tuple(fresh.totals[0]), tuple(fresh.totals[1])) == report.best_totals
    for v in range(small_bench.num_nodes):
        if small_bench.locked[v]:
            assert report.best_selected[v] == 0


def test_best_run_selection(small_bench):
    config = StrategyConfig(kind="dmp", runs=6, margin=0.25, seed=1)
    report = run_strategy(small_bench, config)
    feas = [r for r in report.runs if r.feasible]
    if feas:
        best_cut = min(r.cut for r in feas)
        assert report.best.feasible
        assert report.best.cut == best_cut
        ties = [r.rur for r in feas if r.cut == best_cut]
        assert report.best.rur == min(ties)
    else:
        assert report.infeasible
        assert report.best.max_violation == min(r.max_violation for r in report.runs)


def test_strategy_deterministic(small_bench):
    config = StrategyConfig(kind="admp-fr", runs=2, margin=0.25, seed=8)
    a = run_strategy(small_bench, config)
    b = run_strategy(small_bench, config)
    assert a.best.cut == b.best.cut
    assert a.best_side == b.best_side
    assert a.best_selected == b.best_selected


def test_sm_prepares_fixed_personalities(small_bench):
    config = StrategyConfig(kind="sm", runs=1, margin=0.25, seed=2)
    cons = resolve_constraints(small_bench, config)
    work, selections = prepare_inputs(small_bench, config, cons)
    assert selections is not None
    for v in range(small_bench.num_nodes):
        assert len(work.pweights[v]) == 1
        assert work.pweights[v][0] == small_bench.pweights[v][selections[v]]
        if small_bench.locked[v]:
            assert selections[v] == 0


def test_sp_prepares_common_selections(small_bench):
    config = StrategyConfig(kind="sp", runs=1, margin=0.25, seed=2)
    cons = resolve_constraints(small_bench, config)
    work, selections = prepare_inputs(small_bench, config, cons)
    assert selections == remap_to_common_resource(small_bench)
    # the collapsed graph leans on the common resource
    spec = sum(1 for plist in work.pweights if any(plist[0][1:]))
    assert spec < small_bench.num_nodes // 4


def test_dynamic_kinds_keep_all_personalities(small_bench):
    config = StrategyConfig(kind="dmp", runs=1, margin=0.25, seed=2)
    cons = resolve_constraints(small_bench, config)
    work, selections = prepare_inputs(small_bench, config, cons)
    assert work is small_bench
    assert selections is None


def fake_report(kind, cut, rur, wall_ms, infeasible=False):
    rec = RunRecord(seed=0, cut=cut, feasible=not infeasible, imbalance=0.0,
                    per_resource=(0.0,), rur=rur, max_violation=0.0,
                    wall_ms=wall_ms)
    report = StrategyReport(kind=kind, config=None, constraints=None)
    report.runs = [rec]
    report.best_index = 0
    report.infeasible = infeasible
    return report


def test_aggregate_normalizes_against_sm():
    table = {
        "a": {"sm": fake_report("sm", 100, 0.5, 10.0),
              "dmp": fake_report("dmp", 80, 0.2, 20.0)},
        "b": {"sm": fake_report("sm", 50, 0.4, 10.0),
              "dmp": fake_report("dmp", 45, 0.1, 30.0, infeasible=True)},
    }
    rows = {row.kind: row for row in aggregate(table)}
    assert rows["sm"].geomean_cut_norm == pytest.approx(1.0)
    assert rows["sm"].geomean_rur == pytest.approx(math.sqrt(0.5 * 0.4))
    assert rows["sm"].mean_time_norm == pytest.approx(1.0)
    assert not rows["sm"].any_infeasible
    assert rows["dmp"].geomean_cut_norm == pytest.approx(math.sqrt(0.8 * 0.9))
    assert rows["dmp"].geomean_rur == pytest.approx(math.sqrt(0.02))
    assert rows["dmp"].mean_time_norm == pytest.approx(2.5)
    assert rows["dmp"].any_infeasible
    assert rows["dmp"].benchmarks == 2


def test_aggregate_requires_sm():
    with pytest.raises(ValueError, match="no benchmark"):
        aggregate({})
    with pytest.raises(ValueError, match="sm baseline"):
        aggregate({"a": {"dmp": fake_report("dmp", 10, 0.1, 1.0)}})
