"""Exhaustive reference partitioner for small instances.

Enumerates the full (side assignment x personality combination) space, so it
is the ground truth the heuristics are cross-checked against in tests and in
the ``verify`` CLI subcommand.  Refuses instances whose space exceeds 10^7.
"""

from dataclasses import dataclass

from .graph import ConstraintSet, Hypergraph
from .metrics import pair_rur_score

SPACE_LIMIT = 10 ** 7


class OracleError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class OracleResult:
    cut: int
    side: tuple[int, ...]
    selected: tuple[int, ...]
    rur: float


def _cut_by_mask(graph: Hypergraph, n: int) -> list[int]:
    """cuts[mask] with bit v = side of node v; node 0 pinned to side 0."""
    emasks = []
    for pins in graph.pins:
        em = 0
        for v in pins:
            em |= 1 << v
        emasks.append(em)
    weights = graph.edge_weight
    cuts = [0] * (1 << (n - 1)) if n > 1 else [0]
    for smask in range(len(cuts)):
        full = smask << 1  # node 0 stays on side 0
        cut = 0
        for em, w in zip(emasks, weights):
            inter = em & full
            if inter != 0 and inter != em:
                cut += w
        cuts[smask] = cut
    return cuts


def _feasible_combos(graph: Hypergraph, side, margins, find_all: bool):
    """Personality combos satisfying the balance margins for fixed sides.

    Branch and bound on prefix sums: for each resource r the two one-sided
    constraints S0(1-m) - S1(1+m) <= 0 and S1(1-m) - S0(1+m) <= 0 are linear
    in the per-node weight choice, so a suffix-wise minimal completion bounds
    every subtree.
    """
    n = graph.num_nodes
    r_total = graph.resource_count
    options = []
    for v in range(n):
        plist = graph.pweights[v]
        options.append(plist[:1] if graph.locked[v] else plist)

    # contribution of node v choosing weights w to constraint (r, sense):
    #   sense 0: +w_r(1-m_r) on side 0, -w_r(1+m_r) on side 1
    #   sense 1: mirrored
    ncons = 2 * r_total
    contrib = []
    for v in range(n):
        rows = []
        for w in options[v]:
            row = [0.0] * ncons
            for r in range(r_total):
                m = margins[r]
                a = w[r] * (1.0 - m)
                b = w[r] * (1.0 + m)
                if side[v] == 0:
                    row[2 * r] = a
                    row[2 * r + 1] = -b
                else:
                    row[2 * r] = -b
                    row[2 * r + 1] = a
            rows.append(row)
        contrib.append(rows)

    suffmin = [[0.0] * ncons for _ in range(n + 1)]
    for v in range(n - 1, -1, -1):
        for c in range(ncons):
            best = min(rows[c] for rows in contrib[v])
            suffmin[v][c] = suffmin[v + 1][c] + best

    out = []
    partial = [0.0] * ncons
    s0 = [0] * r_total
    s1 = [0] * r_total
    pick = [0] * n
    eps = 1e-9  # float slack for pruning only; leaves are checked exactly

    def rec(v: int) -> bool:
        for c in range(ncons):
            if partial[c] + suffmin[v][c] > eps:
                return False
        if v == n:
            for r in range(r_total):
                if abs(s0[r] - s1[r]) > margins[r] * (s0[r] + s1[r]):
                    return False
            out.append(tuple(pick))
            return not find_all
        tv = s0 if side[v] == 0 else s1
        for pid, row in enumerate(contrib[v]):
            for c in range(ncons):
                partial[c] += row[c]
            w = options[v][pid]
            for r in range(r_total):
                tv[r] += w[r]
            pick[v] = pid
            done = rec(v + 1)
            for c in range(ncons):
                partial[c] -= row[c]
            for r in range(r_total):
                tv[r] -= w[r]
            if done:
                return True
        return False

    rec(0)
    return out


def _totals(graph: Hypergraph, side, combo):
    t0 = [0] * graph.resource_count
    t1 = [0] * graph.resource_count
    for v in range(graph.num_nodes):
        w = graph.pweights[v][combo[v]]
        t = t0 if side[v] == 0 else t1
        for r in range(graph.resource_count):
            t[r] += w[r]
    return t0, t1


def oracle_partition(graph: Hypergraph, constraints: ConstraintSet):
    """Optimal feasible bipartition, or None when no assignment is feasible.

    Minimizes cut, then RUR deviation, then the (side, selection) tuples
    lexicographically.  Side symmetry is folded away by pinning node 0.
    """
    n = graph.num_nodes
    if n == 0:
        raise OracleError("empty graph")
    space = graph.combination_count() * (1 << (n - 1))
    if space > SPACE_LIMIT:
        raise OracleError(f"too large for oracle: {space} > {SPACE_LIMIT}")

    margins = constraints.margins
    used = graph.used_resources()
    cuts = _cut_by_mask(graph, n)
    order = sorted(range(len(cuts)), key=lambda m: cuts[m])

    best_cut = None
    tied = []
    for smask in order:
        if best_cut is not None and cuts[smask] > best_cut:
            break
        side = [0] + [(smask >> (v - 1)) & 1 for v in range(1, n)]
        if _feasible_combos(graph, side, margins, find_all=False):
            best_cut = cuts[smask]
            tied.append((smask, side))
    if best_cut is None:
        return None

    best = None
    for smask, side in tied:
        for combo in _feasible_combos(graph, side, margins, find_all=True):
            t0, t1 = _totals(graph, side, combo)
            rur = pair_rur_score(t0, t1, constraints, used)
            key = (rur, tuple(side), combo)
            if best is None or key < best[0]:
                best = (key, side, combo)
    (rur, _, _), side, combo = best
    return OracleResult(best_cut, tuple(side), tuple(combo), rur)
