"""Multilevel hierarchy construction and solution projection.

Coarsening is heavy-edge pair matching on the clique-expansion connectivity
score w(e)/(|pins|-1) in a seeded random visit order.  Each supernode exposes
only a small basis of the personality combinations of its components: the
per-resource extreme aggregates plus the aggregate closest to the target
utilization ratio, which caps the otherwise geometric growth of the
combination space.
"""

import random
from dataclasses import dataclass

from .graph import ConstraintSet, Hypergraph, PartitionState, build_graph, recompute_state
from .metrics import rur_score

ENUM_BUDGET = 4096


@dataclass(frozen=True)
class CoarsenParams:
    coarsest_size: int = 60
    k_max: int | None = None  # None -> 2R+3
    seed: int = 0
    min_factor: float = 1.5
    max_scan_pins: int = 64  # ignore huge nets while scoring matches


@dataclass(frozen=True, slots=True)
class BasisEntry:
    assignment: tuple[int, ...]  # personality id per component, map_down order
    aggregate: tuple[int, ...]


@dataclass(frozen=True)
class Level:
    """One coarsening step; ``graph`` is the coarse graph over ``finer_graph``."""

    finer_graph: Hypergraph
    graph: Hypergraph
    map_down: tuple[tuple[int, ...], ...]
    basis: tuple[tuple[BasisEntry, ...], ...]

    @property
    def is_identity(self) -> bool:
        return self.graph is self.finer_graph


def _component_options(graph: Hypergraph, members):
    """Personality weight lists per component, honoring locks."""
    opts = []
    for v in members:
        plist = graph.pweights[v]
        opts.append(plist[:1] if graph.locked[v] else plist)
    return opts


def _extreme_assignment(options, r: int, pick_max: bool):
    """Per-component extreme in resource r; exact because the sum is separable."""
    assignment = []
    agg = None
    for plist in options:
        if pick_max:
            pid = max(range(len(plist)), key=lambda i: (plist[i][r], -i))
        else:
            pid = min(range(len(plist)), key=lambda i: (plist[i][r], i))
        w = plist[pid]
        assignment.append(pid)
        agg = list(w) if agg is None else [a + b for a, b in zip(agg, w)]
    return tuple(assignment), tuple(agg)


def _rur_nearest_assignment(options, constraints: ConstraintSet, used):
    """Aggregate with minimal RUR deviation: exact by enumeration when the
    combination count fits the budget, greedy component-by-component otherwise."""
    combos = 1
    for plist in options:
        combos *= len(plist)
        if combos > ENUM_BUDGET:
            break
    r_total = len(options[0][0])
    if combos <= ENUM_BUDGET:
        best = None
        stack = [((), (0,) * r_total)]
        for plist in options:
            nxt = []
            for assign, agg in stack:
                for pid, w in enumerate(plist):
                    nxt.append((assign + (pid,), tuple(a + x for a, x in zip(agg, w))))
            stack = nxt
        for assign, agg in stack:
            score = rur_score(agg, constraints, used)
            key = (score, assign)
            if best is None or key < best[0]:
                best = (key, assign, agg)
        return best[1], best[2]
    assignment = []
    agg = [0] * r_total
    for plist in options:
        best = None
        for pid, w in enumerate(plist):
            cand = [a + x for a, x in zip(agg, w)]
            score = rur_score(cand, constraints, used)
            if best is None or score < best[0]:
                best = (score, pid, cand)
        assignment.append(best[1])
        agg = best[2]
    return tuple(assignment), tuple(agg)


def select_personality_basis(options, constraints: ConstraintSet, k_max: int, used=None):
    """Basis of component assignments for one supernode.

    Singleton supernodes keep their own personalities (no combination growth
    to fight); larger ones get the per-resource min/max extremes plus the
    RUR-nearest aggregate, deduplicated by aggregate, extremes first,
    truncated to k_max.
    """
    if len(options) == 1:
        entries = [BasisEntry((pid,), w) for pid, w in enumerate(options[0])]
        if len(entries) <= k_max:
            return tuple(entries)

    r_total = len(options[0][0])
    candidates = []
    for r in range(r_total):
        candidates.append(_extreme_assignment(options, r, pick_max=False))
        candidates.append(_extreme_assignment(options, r, pick_max=True))
    candidates.append(_rur_nearest_assignment(options, constraints, used))

    entries = []
    seen = set()
    for assign, agg in candidates:
        if agg in seen:
            continue
        seen.add(agg)
        entries.append(BasisEntry(tuple(assign), tuple(agg)))
        if len(entries) == k_max:
            break
    return tuple(entries)


def _match_level(graph: Hypergraph, rng: random.Random, max_scan_pins: int):
    """Heavy-edge pair matching; returns map_down groups (coarse id order)."""
    n = graph.num_nodes
    mate = [-1] * n
    order = list(range(n))
    rng.shuffle(order)
    for v in order:
        if mate[v] != -1 or graph.locked[v]:
            continue
        scores: dict[int, float] = {}
        for e in graph.incidence[v]:
            pins = graph.pins[e]
            k = len(pins)
            if k > max_scan_pins:
                continue
            s = graph.edge_weight[e] / (k - 1)
            for u in pins:
                if u != v and mate[u] == -1 and not graph.locked[u]:
                    scores[u] = scores.get(u, 0.0) + s
        if not scores:
            continue
        partner = max(scores, key=lambda u: (scores[u], -u))
        mate[v] = partner
        mate[partner] = v
    groups = []
    for v in order:
        if mate[v] == -1:
            groups.append((v,))  # locked nodes always land here
        elif v < mate[v]:
            groups.append((v, mate[v]))
    return groups


def _build_coarse(graph: Hypergraph, groups, constraints: ConstraintSet, k_max: int, used):
    coarse_of = [-1] * graph.num_nodes
    for c, members in enumerate(groups):
        for v in members:
            coarse_of[v] = c

    basis = []
    nodes = []
    for members in groups:
        options = _component_options(graph, members)
        entries = select_personality_basis(options, constraints, k_max, used)
        basis.append(entries)
        locked = len(members) == 1 and graph.locked[members[0]]
        nodes.append(([e.aggregate for e in entries], locked))

    merged: dict[tuple[int, ...], int] = {}
    for e in range(graph.num_edges):
        cpins = sorted({coarse_of[v] for v in graph.pins[e]})
        if len(cpins) < 2:
            continue
        key = tuple(cpins)
        merged[key] = merged.get(key, 0) + graph.edge_weight[e]
    edges = [(w, list(k)) for k, w in merged.items()]

    coarse = build_graph(graph.resource_count, nodes, edges)
    return Level(graph, coarse, tuple(tuple(g) for g in groups), tuple(basis))


def coarsen(graph: Hypergraph, constraints: ConstraintSet, params: CoarsenParams):
    """Hierarchy of levels, coarsest last.

    Stops at params.coarsest_size nodes, or earlier when matching no longer
    shrinks the graph by at least params.min_factor.  A graph that is already
    small yields one identity level so callers can treat the result uniformly.
    """
    k_max = params.k_max if params.k_max is not None else 2 * graph.resource_count + 3
    used = graph.used_resources()
    rng = random.Random(params.seed)
    levels: list[Level] = []
    current = graph
    while current.num_nodes > params.coarsest_size:
        groups = _match_level(current, rng, params.max_scan_pins)
        if len(groups) * params.min_factor > current.num_nodes:
            break
        level = _build_coarse(current, groups, constraints, k_max, used)
        levels.append(level)
        current = level.graph
    if not levels:
        ident = Level(
            graph,
            graph,
            tuple((v,) for v in range(graph.num_nodes)),
            tuple(
                tuple(BasisEntry((pid,), w) for pid, w in enumerate(graph.pweights[v]))
                for v in range(graph.num_nodes)
            ),
        )
        levels.append(ident)
    return levels


class ProjectionError(RuntimeError):
    pass


def project(level: Level, coarse_state: PartitionState) -> PartitionState:
    """Push a coarse solution one level down; cut and totals are preserved."""
    finer = level.finer_graph
    side = [0] * finer.num_nodes
    selected = [0] * finer.num_nodes
    for c, members in enumerate(level.map_down):
        entries = level.basis[c]
        chosen = coarse_state.selected[c]
        if chosen >= len(entries):
            raise ProjectionError(f"supernode {c}: basis entry {chosen} lost")
        assignment = entries[chosen].assignment
        s = coarse_state.side[c]
        for v, pid in zip(members, assignment):
            side[v] = s
            selected[v] = pid
    return recompute_state(finer, side, selected)
