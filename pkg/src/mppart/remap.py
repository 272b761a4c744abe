"""Personality remapping: greedy sweeps, fractured exact solves, common-mode collapse.

Remaps never move nodes or touch the cut; they re-pick personalities to steer
balance, RUR, or a weighted blend.  A change is admissible when the state
stays feasible, or, starting from an infeasible state, when the worst
margin-violation ratio does not grow.
"""

import random
from dataclasses import dataclass

from .graph import ConstraintSet, Hypergraph, PartitionState
from .metrics import (
    imbalance_score,
    is_feasible,
    max_violation_ratio,
    pair_rur_score,
    rur_pressure,
)

FRACTURE_MAX = 16
SOLVE_BUDGET = 4096
_EPS = 1e-12


@dataclass(frozen=True)
class RemapObjective:
    mode: str  # "balance" | "rur" | "weighted"
    alpha: float
    margins: tuple[float, ...]
    constraints: ConstraintSet
    used: tuple[bool, ...]
    tolerance: float = 0.0  # >0: ratio pressure only above this level (pass-time use)

    def __post_init__(self):
        if self.mode not in ("balance", "rur", "weighted"):
            raise ValueError(f"unknown remap mode {self.mode!r}")
        if self.mode == "weighted" and not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must be in [0, 1]")
        if self.tolerance < 0.0:
            raise ValueError("tolerance must be >= 0")

    def _rur(self, t0, t1) -> float:
        x = pair_rur_score(t0, t1, self.constraints, self.used)
        return rur_pressure(x, self.tolerance) if self.tolerance > 0.0 else x

    def score(self, t0, t1, mode=None) -> float:
        mode = mode or self.mode
        if mode == "balance":
            return imbalance_score(t0, t1, self.used)
        if mode == "rur":
            return self._rur(t0, t1)
        return (self.alpha * imbalance_score(t0, t1, self.used)
                + (1.0 - self.alpha) * self._rur(t0, t1))

    def admissible(self, t0, t1, incoming_ratio: float) -> bool:
        if is_feasible(t0, t1, self.margins):
            return True
        if incoming_ratio <= 1.0:
            return False
        return max_violation_ratio(t0, t1, self.margins) <= incoming_ratio + _EPS


def _phase_mode(objective: RemapObjective, phase: int) -> str:
    if objective.mode != "weighted":
        return objective.mode
    if phase == 0:
        return "balance"
    if phase == 1:
        return "rur"
    return "weighted"


def greedy_remap(graph: Hypergraph, state: PartitionState, objective: RemapObjective,
                 seed: int, phases: int = 3, side: int | None = None) -> int:
    """Random-order single-node sweeps; each phase keeps per-node argmin choices.

    Ties keep the current personality, then prefer the lowest id.  Stops early
    after a phase that changes nothing.  Returns the number of changes.
    ``side`` restricts the sweep to one partition's nodes.
    """
    eligible = [v for v in range(graph.num_nodes)
                if not graph.locked[v] and len(graph.pweights[v]) > 1
                and (side is None or state.side[v] == side)]
    if not eligible:
        return 0
    rng = random.Random(seed)
    r_count = graph.resource_count
    changed_total = 0
    order = list(eligible)
    for phase in range(phases):
        mode = _phase_mode(objective, phase)
        rng.shuffle(order)
        changed = 0
        for v in order:
            side = state.side[v]
            cur = state.selected[v]
            w_cur = graph.pweights[v][cur]
            t_mine = state.totals[side]
            t_other = state.totals[1 - side]
            base = [t_mine[r] - w_cur[r] for r in range(r_count)]
            incoming_ratio = max_violation_ratio(
                state.totals[0], state.totals[1], objective.margins)
            best_pid = cur
            best_score = None
            for pid, w in enumerate(graph.pweights[v]):
                mine = [base[r] + w[r] for r in range(r_count)]
                t0, t1 = (mine, t_other) if side == 0 else (t_other, mine)
                if pid != cur and not objective.admissible(t0, t1, incoming_ratio):
                    continue
                score = objective.score(t0, t1, mode)
                if best_score is None:
                    best_pid, best_score = pid, score
                elif pid == cur:
                    if score <= best_score:
                        best_pid, best_score = pid, score
                elif score < best_score:
                    best_pid, best_score = pid, score
            if best_pid != cur:
                state.set_personality(v, best_pid)
                changed += 1
        changed_total += changed
        if changed == 0:
            break
    return changed_total


def fracture(graph: Hypergraph, state: PartitionState, f_max: int = FRACTURE_MAX,
             seed: int = 0, side: int | None = None, node_cap: int | None = None):
    """Chunk remappable nodes by their dominant weight-spread resource.

    ``node_cap`` bounds the sweep to a seeded sample of the eligible nodes.
    """
    eligible = [v for v in range(graph.num_nodes)
                if not graph.locked[v] and len(graph.pweights[v]) > 1
                and (side is None or state.side[v] == side)]
    if node_cap is not None and len(eligible) > node_cap:
        eligible = random.Random(seed ^ 0xCA9).sample(eligible, node_cap)
    groups: dict[int, list[int]] = {}
    for v in eligible:
        opts = graph.pweights[v]
        dom = 0
        dom_spread = -1
        for r in range(graph.resource_count):
            col = [w[r] for w in opts]
            spread = max(col) - min(col)
            if spread > dom_spread:
                dom, dom_spread = r, spread
        groups.setdefault(dom, []).append(v)
    rng = random.Random(seed)
    fragments = []
    for r in sorted(groups):
        members = groups[r]
        rng.shuffle(members)
        for i in range(0, len(members), f_max):
            fragments.append(tuple(members[i:i + f_max]))
    return fragments


def _suffix_bounds(graph, state, fragment, r_count):
    """Per-depth, per-resource min/max totals reachable from the remaining nodes."""
    n = len(fragment)
    lo0 = [[0] * r_count for _ in range(n + 1)]
    hi0 = [[0] * r_count for _ in range(n + 1)]
    lo1 = [[0] * r_count for _ in range(n + 1)]
    hi1 = [[0] * r_count for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        v = fragment[i]
        side = state.side[v]
        opts = graph.pweights[v]
        for r in range(r_count):
            col = [w[r] for w in opts]
            cmin, cmax = min(col), max(col)
            lo0[i][r] = lo0[i + 1][r] + (cmin if side == 0 else 0)
            hi0[i][r] = hi0[i + 1][r] + (cmax if side == 0 else 0)
            lo1[i][r] = lo1[i + 1][r] + (cmin if side == 1 else 0)
            hi1[i][r] = hi1[i + 1][r] + (cmax if side == 1 else 0)
    return lo0, hi0, lo1, hi1


def solve_fragment(graph: Hypergraph, state: PartitionState, fragment,
                   objective: RemapObjective, budget: int = SOLVE_BUDGET):
    """Exact best admissible assignment for one fragment; mutates the state.

    Fragments whose choice product exceeds the budget are split in half and
    solved in sequence.  The incoming assignment seeds the incumbent, so the
    result is never worse; ties keep the incoming choices.
    """
    if not fragment:
        return {}
    options = [tuple(range(len(graph.pweights[v]))) if not graph.locked[v] else (0,)
               for v in fragment]
    prod = 1
    for opts in options:
        prod *= len(opts)
    if prod > budget and len(fragment) > 1:
        mid = len(fragment) // 2
        out = solve_fragment(graph, state, fragment[:mid], objective, budget)
        out.update(solve_fragment(graph, state, fragment[mid:], objective, budget))
        return out

    r_count = graph.resource_count
    incoming = [state.selected[v] for v in fragment]
    incoming_ratio = max_violation_ratio(state.totals[0], state.totals[1],
                                         objective.margins)
    t0 = list(state.totals[0])
    t1 = list(state.totals[1])
    # strip the fragment's current contributions; DFS adds candidates back
    for v, cur in zip(fragment, incoming):
        w = graph.pweights[v][cur]
        row = t0 if state.side[v] == 0 else t1
        for r in range(r_count):
            row[r] -= w[r]

    bound = None
    if objective.mode == "balance":
        bound = _suffix_bounds(graph, state, fragment, r_count)
        used_idx = [r for r in range(r_count) if objective.used[r]]
        n_used = len(used_idx)

    best_score = objective.score(state.totals[0], state.totals[1])
    best = list(incoming)
    n = len(fragment)
    current = [0] * n

    def dfs(i):
        nonlocal best_score, best
        if i == n:
            if not objective.admissible(t0, t1, incoming_ratio):
                return
            score = objective.score(t0, t1)
            if score < best_score:
                best_score = score
                best = list(current)
            return
        if bound is not None and n_used:
            lo0, hi0, lo1, hi1 = bound
            acc = 0.0
            for r in used_idx:
                a_lo = t0[r] + lo0[i][r]
                a_hi = t0[r] + hi0[i][r]
                b_lo = t1[r] + lo1[i][r]
                b_hi = t1[r] + hi1[i][r]
                d_lo = a_lo - b_hi
                d_hi = a_hi - b_lo
                min_abs = max(d_lo, -d_hi, 0)
                t_hi = a_hi + b_hi
                if t_hi > 0 and min_abs > 0:
                    f = min_abs / t_hi
                    acc += f * f
            lb = (acc / n_used) ** 0.5
            if lb > best_score + _EPS:
                return
        v = fragment[i]
        row = t0 if state.side[v] == 0 else t1
        for pid in options[i]:
            w = graph.pweights[v][pid]
            for r in range(r_count):
                row[r] += w[r]
            current[i] = pid
            dfs(i + 1)
            for r in range(r_count):
                row[r] -= w[r]

    dfs(0)
    result = {}
    for v, pid in zip(fragment, best):
        result[v] = pid
        if state.selected[v] != pid:
            state.set_personality(v, pid)
    return result


def fractured_ilp_remap(graph: Hypergraph, state: PartitionState,
                        objective: RemapObjective, f_max: int = FRACTURE_MAX,
                        rounds: int = 3, seed: int = 0, side: int | None = None,
                        node_cap: int | None = None) -> int:
    """Fracture, solve each fragment against the live state, repeat; never worse."""
    changed_total = 0
    for rnd in range(rounds):
        fragments = fracture(graph, state, f_max, seed=seed * 9176 + rnd, side=side,
                             node_cap=node_cap)
        changed = 0
        for frag in fragments:
            before = [state.selected[v] for v in frag]
            result = solve_fragment(graph, state, frag, objective)
            changed += sum(1 for v, old in zip(frag, before) if result[v] != old)
        changed_total += changed
        if changed == 0:
            break
    return changed_total


def remap_to_common_resource(graph: Hypergraph, common: int = 0):
    """Per-node personality concentrated in the common resource, if one exists.

    Candidates have zero weight outside the common resource; the lightest wins,
    ties by lowest id.  Nodes without such a personality keep personality 0.
    Locked nodes always keep personality 0.
    """
    selections = []
    r_count = graph.resource_count
    for v in range(graph.num_nodes):
        if graph.locked[v]:
            selections.append(0)
            continue
        best = None
        for pid, w in enumerate(graph.pweights[v]):
            if any(w[r] != 0 for r in range(r_count) if r != common):
                continue
            key = (sum(w), pid)
            if best is None or key < best:
                best = key
        selections.append(best[1] if best is not None else 0)
    return selections
