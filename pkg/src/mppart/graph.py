"""Multi-personality hypergraph model and incrementally maintained partition state.

Nodes carry one or more *personalities* (alternative implementations with
different per-resource weights); hyperedges are weighted pin sets.  The
bipartition state tracks per-side resource totals, per-edge side counts and
the weighted cut, all maintained incrementally and recomputable from scratch.
"""

from dataclasses import dataclass, field


class GraphError(ValueError):
    """Invalid graph structure (bad pins, personalities or resource counts)."""


class MoveError(ValueError):
    """Illegal partition-state mutation (wrong side or forbidden personality)."""


ResourceVec = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Personality:
    """One implementation choice for a node: id + per-resource weight vector."""

    id: int
    weights: ResourceVec


@dataclass(frozen=True, slots=True)
class Node:
    id: int
    personalities: tuple[Personality, ...]
    locked: bool = False  # locked => personality 0 is fixed forever


@dataclass(frozen=True, slots=True)
class Hyperedge:
    weight: int
    pins: tuple[int, ...]  # distinct node ids, sorted


class Hypergraph:
    """Immutable hypergraph; build with :func:`build_graph`.

    Besides the node/edge records it caches flat pin/weight/incidence lists
    used by the hot refinement loops.
    """

    __slots__ = (
        "resource_count",
        "nodes",
        "edges",
        "incidence",
        "pins",
        "edge_weight",
        "pweights",
        "locked",
    )

    def __init__(self, resource_count: int, nodes: tuple[Node, ...], edges: tuple[Hyperedge, ...]):
        self.resource_count = resource_count
        self.nodes = nodes
        self.edges = edges
        self.pins = [e.pins for e in edges]
        self.edge_weight = [e.weight for e in edges]
        # pweights[v][p] is the weight tuple of personality p of node v
        self.pweights = [[p.weights for p in n.personalities] for n in nodes]
        self.locked = [n.locked for n in nodes]
        inc: list[list[int]] = [[] for _ in nodes]
        for eid, e in enumerate(edges):
            for v in e.pins:
                inc[v].append(eid)
        self.incidence = inc

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def combination_count(self) -> int:
        """Number of distinct whole-graph personality assignments."""
        c = 1
        for n in self.nodes:
            c *= len(n.personalities)
        return c

    def used_resources(self) -> tuple[bool, ...]:
        """Mask of resources that some personality of some node can occupy."""
        used = [False] * self.resource_count
        for plist in self.pweights:
            for w in plist:
                for r, x in enumerate(w):
                    if x:
                        used[r] = True
        return tuple(used)

    def max_totals(self) -> ResourceVec:
        """Per-resource total when every node picks its heaviest personality."""
        out = [0] * self.resource_count
        for plist in self.pweights:
            for r in range(self.resource_count):
                out[r] += max(w[r] for w in plist)
        return tuple(out)


@dataclass(frozen=True, slots=True)
class ConstraintSet:
    """Balance margins, utilization-ratio target and device capacities.

    ``margins[r]`` bounds the side-to-side weight difference in resource *r*
    as a fraction of the graph's current total weight in *r* (the total moves
    when personalities change).  ``relaxation`` widens margins on coarse
    levels; ``None`` keeps them flat.
    """

    margins: tuple[float, ...]
    target_rur: tuple[float, ...]
    capacities: tuple[int, ...]
    relaxation: "object | None" = None  # RelaxationSchedule, kept loose to avoid an import cycle

    def __post_init__(self):
        if not all(0.0 < m <= 1.0 for m in self.margins):
            raise ValueError("margins must be in (0, 1]")
        if not all(t > 0 for t in self.target_rur):
            raise ValueError("target_rur entries must be positive")
        if not all(c > 0 for c in self.capacities):
            raise ValueError("capacities must be positive")


def build_graph(resource_count: int, nodes, edges) -> Hypergraph:
    """Validate nodes/edges and construct a hypergraph with incidence lists.

    ``nodes`` may be ``Node`` records or ``(personalities, locked)`` raw
    tuples where each personality is a weight tuple; ``edges`` may be
    ``Hyperedge`` records or ``(weight, pins)`` tuples.
    """
    if resource_count < 1:
        raise GraphError("resource_count must be >= 1")

    norm_nodes: list[Node] = []
    for i, n in enumerate(nodes):
        if isinstance(n, Node):
            plist = [(p.weights) for p in n.personalities]
            locked = n.locked
        else:
            plist, locked = n
            plist = [tuple(w) for w in plist]
        if len(plist) == 0:
            raise GraphError(f"node {i}: empty personality list")
        seen = set()
        pers = []
        for pid, w in enumerate(plist):
            if len(w) != resource_count:
                raise GraphError(f"node {i} personality {pid}: expected {resource_count} weights, got {len(w)}")
            if any(x < 0 for x in w):
                raise GraphError(f"node {i} personality {pid}: negative weight")
            if not any(x > 0 for x in w):
                raise GraphError(f"node {i} personality {pid}: zero-weight personality")
            if w in seen:
                raise GraphError(f"node {i}: duplicate personality {w}")
            seen.add(w)
            pers.append(Personality(pid, w))
        norm_nodes.append(Node(i, tuple(pers), bool(locked)))

    n_nodes = len(norm_nodes)
    norm_edges: list[Hyperedge] = []
    for j, e in enumerate(edges):
        if isinstance(e, Hyperedge):
            weight, pin_list = e.weight, list(e.pins)
        else:
            weight, pin_list = e[0], list(e[1])
        if weight <= 0:
            raise GraphError(f"edge {j}: weight must be positive")
        if len(set(pin_list)) != len(pin_list):
            raise GraphError(f"edge {j}: duplicate pin")
        if len(pin_list) < 2:
            raise GraphError(f"edge {j}: needs at least 2 pins")
        for v in pin_list:
            if not (0 <= v < n_nodes):
                raise GraphError(f"edge {j}: pin {v} out of range [0, {n_nodes})")
        norm_edges.append(Hyperedge(int(weight), tuple(sorted(pin_list))))

    return Hypergraph(resource_count, tuple(norm_nodes), tuple(norm_edges))


class PartitionState:
    """Mutable bipartition state: sides, selected personalities, running totals.

    Invariants (checked by tests against :func:`recompute_state`):
    totals match a from-scratch sum, ``cut`` matches the weighted count of
    spanning edges, and locked nodes keep personality 0.
    """

    __slots__ = ("graph", "side", "selected", "totals", "cut", "counts0", "counts1")

    def __init__(self, graph: Hypergraph, side, selected, totals, cut, counts0, counts1):
        self.graph = graph
        self.side = side
        self.selected = selected
        self.totals = totals
        self.cut = cut
        self.counts0 = counts0
        self.counts1 = counts1

    @property
    def edge_side_counts(self):
        return list(zip(self.counts0, self.counts1))

    def copy(self) -> "PartitionState":
        return PartitionState(
            self.graph,
            self.side[:],
            self.selected[:],
            [self.totals[0][:], self.totals[1][:]],
            self.cut,
            self.counts0[:],
            self.counts1[:],
        )

    def same_as(self, other: "PartitionState") -> bool:
        """Field-for-field equality of the partition data (graph identity aside)."""
        return (
            self.side == other.side
            and self.selected == other.selected
            and self.totals == other.totals
            and self.cut == other.cut
            and self.counts0 == other.counts0
            and self.counts1 == other.counts1
        )

    def apply_move(self, node: int, to_side: int, personality: int) -> int:
        """Move ``node`` to ``to_side`` selecting ``personality``; return realized gain.

        Gain is the cut reduction (cut_before - cut_after).  Totals, edge side
        counts and the cut are updated incrementally.
        """
        g = self.graph
        side = self.side
        from_side = side[node]
        if from_side == to_side:
            raise MoveError(f"node {node} is already on side {to_side}")
        plist = g.pweights[node]
        if not (0 <= personality < len(plist)):
            raise MoveError(f"node {node}: personality {personality} out of range")
        if g.locked[node] and personality != 0:
            raise MoveError(f"node {node} is locked to personality 0")

        cut_before = self.cut
        w_old = plist[self.selected[node]]
        w_new = plist[personality]
        t_from = self.totals[from_side]
        t_to = self.totals[to_side]
        for r in range(g.resource_count):
            t_from[r] -= w_old[r]
            t_to[r] += w_new[r]
        self.selected[node] = personality

        counts0 = self.counts0
        counts1 = self.counts1
        eweight = g.edge_weight
        cut = self.cut
        if from_side == 0:
            for e in g.incidence[node]:
                a = counts0[e]
                b = counts1[e]
                counts0[e] = a - 1
                counts1[e] = b + 1
                # was cut iff b > 0 (a >= 1 always); stays cut iff a-1 > 0
                if b == 0:
                    if a > 1:
                        cut += eweight[e]
                elif a == 1:
                    cut -= eweight[e]
        else:
            for e in g.incidence[node]:
                a = counts0[e]
                b = counts1[e]
                counts1[e] = b - 1
                counts0[e] = a + 1
                if a == 0:
                    if b > 1:
                        cut += eweight[e]
                elif b == 1:
                    cut -= eweight[e]
        self.cut = cut
        side[node] = to_side
        return cut_before - cut

    def set_personality(self, node: int, personality: int) -> None:
        """Reselect a node's personality in place (side unchanged, cut unchanged)."""
        g = self.graph
        plist = g.pweights[node]
        if not (0 <= personality < len(plist)):
            raise MoveError(f"node {node}: personality {personality} out of range")
        if g.locked[node] and personality != 0:
            raise MoveError(f"node {node} is locked to personality 0")
        old = self.selected[node]
        if old == personality:
            return
        w_old = plist[old]
        w_new = plist[personality]
        t = self.totals[self.side[node]]
        for r in range(g.resource_count):
            t[r] += w_new[r] - w_old[r]
        self.selected[node] = personality


def recompute_state(graph: Hypergraph, side, selected) -> PartitionState:
    """Build a partition state from scratch (the oracle for incremental updates)."""
    n = graph.num_nodes
    if len(side) != n or len(selected) != n:
        raise MoveError("side/selected length mismatch")
    side = list(side)
    selected = list(selected)
    totals = [[0] * graph.resource_count, [0] * graph.resource_count]
    for v in range(n):
        if side[v] not in (0, 1):
            raise MoveError(f"node {v}: side must be 0 or 1")
        plist = graph.pweights[v]
        if not (0 <= selected[v] < len(plist)):
            raise MoveError(f"node {v}: personality {selected[v]} out of range")
        if graph.locked[v] and selected[v] != 0:
            raise MoveError(f"node {v} is locked to personality 0")
        w = plist[selected[v]]
        t = totals[side[v]]
        for r in range(graph.resource_count):
            t[r] += w[r]
    counts0 = [0] * graph.num_edges
    counts1 = [0] * graph.num_edges
    cut = 0
    for e, pins in enumerate(graph.pins):
        c1 = 0
        for v in pins:
            c1 += side[v]
        c0 = len(pins) - c1
        counts0[e] = c0
        counts1[e] = c1
        if c0 > 0 and c1 > 0:
            cut += graph.edge_weight[e]
    return PartitionState(graph, side, selected, totals, cut, counts0, counts1)


def uniform_state(graph: Hypergraph, side_value: int = 0, selected=None) -> PartitionState:
    """All nodes on one side; handy for whole-graph remapping before any split."""
    sel = list(selected) if selected is not None else [0] * graph.num_nodes
    return recompute_state(graph, [side_value] * graph.num_nodes, sel)
