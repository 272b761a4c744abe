"""KLFM pass engine and multilevel driver.

A pass repeatedly applies the bucket-selected move (each one feasible under
the current margins), freezing moved nodes, then rolls back to the feasible
prefix with the smallest cut.  Levels run from coarsest to flattest with
margins widened on coarse levels when a relaxation schedule is configured;
a balance-only remap tries to repair any residual infeasibility at the end.
"""

import random
from dataclasses import dataclass

from .buckets import PassBuckets
from .coarsen import CoarsenParams, coarsen, project
from .graph import ConstraintSet, Hypergraph, PartitionState, recompute_state
from .metrics import (
    RUR_TOLERANCE,
    balance_violations,
    imbalance_score,
    is_feasible,
    max_violation_ratio,
    pair_rur_score,
    rur_score,
)
from . import remap as remap_mod


@dataclass(frozen=True)
class RelaxationSchedule:
    coarse_margin: float = 0.20
    final_margin: float = 0.01
    shape: str = "linear"

    def __post_init__(self):
        if not (0.0 < self.final_margin <= self.coarse_margin):
            raise ValueError("need coarse_margin >= final_margin > 0")
        if self.shape not in ("linear", "geometric"):
            raise ValueError(f"unknown shape {self.shape!r}")


def effective_margins(level_index: int, num_levels: int, schedule, base_margins):
    """Per-resource margins for one level; base margins scaled by m(L)/final.

    Level 0 is the flattest.  Without a schedule margins are flat.
    """
    if schedule is None or num_levels <= 1 or level_index == 0:
        return tuple(base_margins)
    t = level_index / (num_levels - 1)
    final = schedule.final_margin
    coarse = schedule.coarse_margin
    if schedule.shape == "linear":
        m = final + (coarse - final) * t
    else:
        m = final * (coarse / final) ** t
    scale = m / final
    return tuple(min(1.0, b * scale) for b in base_margins)


@dataclass(frozen=True, slots=True)
class MoveRec:
    node: int
    from_side: int
    to_side: int
    old_personality: int
    new_personality: int
    gain_pred: int
    gain_realized: int
    cut_after: int


@dataclass(frozen=True)
class PassRecord:
    moves: tuple[MoveRec, ...]
    best_prefix: int
    cut_start: int
    cut_best: int
    imbalance_best: float
    rur_best: float

    @property
    def improvement(self) -> int:
        return self.cut_start - self.cut_best


REPAIR_NODE_CAP = 512
REPAIR_ROUNDS = 4

# pass stall cutoff: end a pass once this many moves in a row fail to produce
# a new best prefix; below STALL_MIN nodes a pass always runs to exhaustion
STALL_MIN = 2048
STALL_DIV = 8


def _violation_key(t0, t1, margins, used):
    viol = max_violation_ratio(t0, t1, margins)
    try:
        rms = imbalance_score(t0, t1, used)
    except Exception:
        rms = 0.0
    return (viol, rms)


def _repair_feasibility(graph: Hypergraph, state: PartitionState, margins, used):
    """Violation-targeting mini-passes: any move allowed, frozen-once, rollback
    to the prefix with the smallest worst-resource violation ratio."""
    n = graph.num_nodes
    if n > REPAIR_NODE_CAP:
        return
    r_count = graph.resource_count
    for _ in range(REPAIR_ROUNDS):
        if is_feasible(state.totals[0], state.totals[1], margins):
            return
        frozen = [False] * n
        undo = []
        best_key = _violation_key(state.totals[0], state.totals[1], margins, used)
        best_prefix = 0
        for _step in range(n):
            t_cur = state.totals
            pick = None
            pick_key = None
            for v in range(n):
                if frozen[v]:
                    continue
                s = state.side[v]
                w_cur = graph.pweights[v][state.selected[v]]
                tf = t_cur[s]
                tt = t_cur[1 - s]
                pids = (0,) if graph.locked[v] else range(len(graph.pweights[v]))
                for pid in pids:
                    wp = graph.pweights[v][pid]
                    a = [tf[r] - w_cur[r] for r in range(r_count)]
                    b = [tt[r] + wp[r] for r in range(r_count)]
                    t0, t1 = (a, b) if s == 0 else (b, a)
                    key = _violation_key(t0, t1, margins, used)
                    if pick_key is None or key < pick_key:
                        pick_key = key
                        pick = (v, 1 - s, pid, s, state.selected[v])
            if pick is None:
                break
            v, to_side, pid, from_side, old_pid = pick
            state.apply_move(v, to_side, pid)
            frozen[v] = True
            undo.append((v, from_side, old_pid))
            if pick_key < best_key:
                best_key = pick_key
                best_prefix = len(undo)
        for i in range(len(undo) - 1, best_prefix - 1, -1):
            v, from_side, old_pid = undo[i]
            state.apply_move(v, from_side, old_pid)


def _flip_gain(graph: Hypergraph, state: PartitionState, v: int) -> int:
    """Cut reduction if ``v`` switches sides (personality unchanged)."""
    s = state.side[v]
    c_same = state.counts0 if s == 0 else state.counts1
    c_other = state.counts1 if s == 0 else state.counts0
    gain = 0
    for e in graph.incidence[v]:
        a = c_same[e]
        b = c_other[e]
        if a == 1 and b > 0:
            gain += graph.edge_weight[e]
        elif b == 0 and a > 1:
            gain -= graph.edge_weight[e]
    return gain


REPAIR_MAX_ROUNDS = 6


def _balance_repair(graph: Hypergraph, state: PartitionState, margins, used) -> None:
    """Violation-reduction sweep sized for large graphs.

    Rounds pick the worst-violated resource and walk its heavy side's movers
    in descending flip gain, re-selecting each mover's personality to whatever
    lands with the least violation.  Moves may pass through worse states;
    the state rolls back to the best (violation, cut) prefix at the end.
    """
    n = graph.num_nodes
    r_count = graph.resource_count
    t0, t1 = state.totals
    best_key = (max_violation_ratio(t0, t1, margins), state.cut)
    if best_key[0] == 0.0:
        return
    frozen = bytearray(n)
    undo: list[tuple[int, int, int]] = []
    best_prefix = 0
    done = False
    for _round in range(REPAIR_MAX_ROUNDS):
        if done:
            break
        t0, t1 = state.totals
        worst_r = -1
        worst = 1.0
        for r in range(r_count):
            t = t0[r] + t1[r]
            if not used[r] or t == 0:
                continue
            lim = margins[r] * t
            over = abs(t0[r] - t1[r]) / lim if lim > 0 else float("inf")
            if over > worst:
                worst = over
                worst_r = r
        if worst_r < 0:
            break
        heavy = 0 if t0[worst_r] > t1[worst_r] else 1
        cands = []
        for v in range(n):
            if frozen[v] or graph.locked[v] or state.side[v] != heavy:
                continue
            if graph.pweights[v][state.selected[v]][worst_r] <= 0:
                continue
            cands.append((-_flip_gain(graph, state, v), v))
        if not cands:
            break
        cands.sort()
        progressed = False
        for _, v in cands:
            t0, t1 = state.totals
            th, tl = (t0, t1) if heavy == 0 else (t1, t0)
            d = th[worst_r] - tl[worst_r]
            if d <= 0 or d <= margins[worst_r] * (th[worst_r] + tl[worst_r]):
                break
            w_cur = graph.pweights[v][state.selected[v]]
            best_pid = None
            best_pid_key = None
            for pid, wp in enumerate(graph.pweights[v]):
                a = [th[r] - w_cur[r] for r in range(r_count)]
                b = [tl[r] + wp[r] for r in range(r_count)]
                n0, n1 = (a, b) if heavy == 0 else (b, a)
                key = (max_violation_ratio(n0, n1, margins),
                       0 if pid == state.selected[v] else 1, pid)
                if best_pid_key is None or key < best_pid_key:
                    best_pid_key = key
                    best_pid = pid
            old_pid = state.selected[v]
            state.apply_move(v, 1 - heavy, best_pid)
            frozen[v] = 1
            undo.append((v, heavy, old_pid))
            progressed = True
            key = (max_violation_ratio(state.totals[0], state.totals[1], margins),
                   state.cut)
            if key < best_key:
                best_key = key
                best_prefix = len(undo)
            if key[0] == 0.0:
                done = True
                break
        if not progressed:
            break
    for i in range(len(undo) - 1, best_prefix - 1, -1):
        v, from_side, old_pid = undo[i]
        state.apply_move(v, from_side, old_pid)


def initial_partition(graph: Hypergraph, constraints: ConstraintSet, seed: int,
                      selections=None, margins=None) -> PartitionState:
    """Seeded shuffle, each node greedily placed on the RMS-lighter side.

    If the greedy placement misses the margins, violation-reducing repair
    passes run before giving up; the result may still be infeasible
    (best-effort), which refinement and remapping may later repair.
    """
    n = graph.num_nodes
    if selections is None:
        selections = [0] * n
    used = graph.used_resources()
    r_count = graph.resource_count
    order = list(range(n))
    random.Random(seed).shuffle(order)
    side = [0] * n
    totals = [[0] * r_count, [0] * r_count]
    for v in order:
        w = graph.pweights[v][selections[v]]
        best_side = 0
        best_score = None
        for s in (0, 1):
            acc = 0.0
            cnt = 0
            for r in range(r_count):
                if not used[r]:
                    continue
                a = totals[0][r] + (w[r] if s == 0 else 0)
                b = totals[1][r] + (w[r] if s == 1 else 0)
                t = a + b
                if t == 0:
                    continue
                f = (a - b) / t
                acc += f * f
                cnt += 1
            score = acc / cnt if cnt else 0.0
            if best_score is None or score < best_score:
                best_score = score
                best_side = s
        side[v] = best_side
        tw = totals[best_side]
        for r in range(r_count):
            tw[r] += w[r]
    state = recompute_state(graph, side, selections)
    if margins is None:
        margins = constraints.margins
    if not is_feasible(state.totals[0], state.totals[1], margins):
        _repair_feasibility(graph, state, margins, used)
    return state


def min_rur_selections(graph: Hypergraph, constraints: ConstraintSet):
    """Per-node personality with the lowest solo RUR deviation (locked keep 0)."""
    used = graph.used_resources()
    out = []
    for v in range(graph.num_nodes):
        if graph.locked[v]:
            out.append(0)
            continue
        best = None
        for pid, w in enumerate(graph.pweights[v]):
            s = rur_score(w, constraints, used)
            if best is None or s < best[0]:
                best = (s, pid)
        out.append(best[1])
    return out


def run_pass(graph: Hypergraph, state: PartitionState, bucket_kind: str, policy,
             constraints: ConstraintSet, margins, used=None):
    """One KLFM pass; mutates state to the best feasible prefix and records it.

    Ends early once a long streak of moves fails to find a new best prefix;
    the rollback discards that tail anyway.
    """
    cut_start = state.cut
    buckets = PassBuckets(graph, state, constraints, margins, policy, bucket_kind, used)
    start_feasible = is_feasible(state.totals[0], state.totals[1], margins)
    best_prefix = 0 if start_feasible else None
    best_cut = cut_start if start_feasible else None
    stall_limit = max(STALL_MIN, graph.num_nodes // STALL_DIV)
    moves: list[MoveRec] = []
    undo: list[tuple[int, int, int]] = []
    while True:
        choice = buckets.select()
        if choice is None:
            break
        v = choice.node
        from_side = state.side[v]
        old_pid = state.selected[v]
        realized = buckets.apply(choice)
        undo.append((v, from_side, old_pid))
        moves.append(MoveRec(v, from_side, choice.to_side, old_pid, choice.personality,
                             choice.gain, realized, state.cut))
        # every applied move lands feasible, so every nonzero prefix competes
        if best_cut is None or state.cut < best_cut:
            best_cut = state.cut
            best_prefix = len(moves)
        elif len(moves) - (best_prefix or 0) >= stall_limit:
            break
    if best_prefix is None:
        best_prefix = 0
        best_cut = cut_start
    for i in range(len(moves) - 1, best_prefix - 1, -1):
        v, from_side, old_pid = undo[i]
        state.apply_move(v, from_side, old_pid)
    t0, t1 = state.totals
    rec = PassRecord(
        moves=tuple(moves),
        best_prefix=best_prefix,
        cut_start=cut_start,
        cut_best=state.cut,
        imbalance_best=imbalance_score(t0, t1, buckets.used),
        rur_best=pair_rur_score(t0, t1, constraints, buckets.used),
    )
    return rec


@dataclass(frozen=True)
class RefineConfig:
    """Per-strategy wiring for the refinement engine."""

    bucket_kind: str = "ra"
    policy: tuple = ("imbalance",)
    pass_remap: str | None = None  # None | "balance" | "weighted"
    relaxation: RelaxationSchedule | None = None
    max_passes: int = 16
    coarsest_size: int = 60
    k_max: int | None = None
    select_rule: str = "min_rur"  # initial personalities: "min_rur" | "first"
    repair: bool = True
    alpha: float = 0.5


def refine_level(graph: Hypergraph, state: PartitionState, constraints: ConstraintSet,
                 margins, config: RefineConfig, seed: int):
    """Pass + optional pass-level remap until neither changes anything."""
    records = []
    used = graph.used_resources()
    for pass_idx in range(config.max_passes):
        if config.repair and not is_feasible(state.totals[0], state.totals[1], margins):
            # projection or a tightened margin schedule can hand this level an
            # out-of-margin state; passes only offer in-margin moves, so pull
            # the state back inside before optimizing
            _balance_repair(graph, state, margins, used)
        rec = run_pass(graph, state, config.bucket_kind, config.policy,
                       constraints, margins, used)
        records.append(rec)
        changed = 0
        if config.pass_remap is not None:
            mode = "balance" if config.pass_remap == "balance" else "weighted"
            objective = remap_mod.RemapObjective(
                mode=mode, alpha=config.alpha, margins=tuple(margins),
                constraints=constraints, used=used, tolerance=RUR_TOLERANCE)
            changed = remap_mod.greedy_remap(graph, state, objective,
                                             seed=seed * 1000003 + pass_idx)
        if rec.best_prefix == 0 and changed == 0:
            break
    return records


@dataclass
class MultilevelResult:
    state: PartitionState
    feasible: bool
    violations: tuple[float, ...]
    stage_cuts: tuple[int, ...]
    num_levels: int


def multilevel_partition(graph: Hypergraph, constraints: ConstraintSet,
                         config: RefineConfig, seed: int) -> MultilevelResult:
    """Coarsen, partition the coarsest level, refine and project down, repair."""
    levels = coarsen(graph, constraints,
                     CoarsenParams(coarsest_size=config.coarsest_size,
                                   k_max=config.k_max, seed=seed))
    if len(levels) == 1 and levels[0].is_identity:
        stage_graphs = [graph]
        transitions = []
    else:
        stage_graphs = [graph] + [lv.graph for lv in levels]
        transitions = levels
    num_levels = len(stage_graphs)

    coarsest = stage_graphs[-1]
    if config.select_rule == "min_rur":
        selections = min_rur_selections(coarsest, constraints)
    elif config.select_rule == "random":
        rng = random.Random(seed ^ 0x5EED)
        selections = [0 if coarsest.locked[v]
                      else rng.randrange(len(coarsest.pweights[v]))
                      for v in range(coarsest.num_nodes)]
    else:
        selections = [0] * coarsest.num_nodes
    coarse_margins = effective_margins(num_levels - 1, num_levels, config.relaxation,
                                       constraints.margins)
    state = initial_partition(coarsest, constraints, seed + 1, selections,
                              margins=coarse_margins)

    stage_cuts = []
    for level_index in range(num_levels - 1, -1, -1):
        margins = effective_margins(level_index, num_levels, config.relaxation,
                                    constraints.margins)
        g = stage_graphs[level_index]
        refine_level(g, state, constraints, margins, config,
                     seed=seed * 31 + level_index)
        stage_cuts.append(state.cut)
        if level_index > 0:
            state = project(transitions[level_index - 1], state)

    base = constraints.margins
    t0, t1 = state.totals
    if config.repair and not is_feasible(t0, t1, base):
        used = graph.used_resources()
        objective = remap_mod.RemapObjective(
            mode="balance", alpha=config.alpha, margins=tuple(base),
            constraints=constraints, used=used)
        remap_mod.greedy_remap(graph, state, objective, seed=seed + 7)
        if not is_feasible(state.totals[0], state.totals[1], base):
            remap_mod.fractured_ilp_remap(graph, state, objective, seed=seed + 8)

    t0, t1 = state.totals
    viol = balance_violations(t0, t1, base)
    return MultilevelResult(
        state=state,
        feasible=all(x == 0.0 for x in viol),
        violations=tuple(viol),
        stage_cuts=tuple(stage_cuts),
        num_levels=num_levels,
    )
