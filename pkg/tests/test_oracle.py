import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mppart import (
    OracleError,
    RefineConfig,
    build_graph,
    multilevel_partition,
    oracle_partition,
    pair_rur_score,
    recompute_state,
)
from mppart.generator import generate_tiny

from conftest import make_constraints, random_graph


def brute_force(graph, constraints):
    """Unpruned sweep over all sides x personality combos; node 0 on side 0."""
    n = graph.num_nodes
    margins = constraints.margins
    used = graph.used_resources()
    options = [
        (0,) if graph.locked[v] else tuple(range(len(graph.pweights[v])))
        for v in range(n)
    ]
    best = None
    for smask in range(1 << (n - 1)):
        side = [0] + [(smask >> (v - 1)) & 1 for v in range(1, n)]
        state = None
        for combo in itertools.product(*options):
            t0 = [0] * graph.resource_count
            t1 = [0] * graph.resource_count
            for v, pid in enumerate(combo):
                w = graph.pweights[v][pid]
                t = t0 if side[v] == 0 else t1
                for r in range(graph.resource_count):
                    t[r] += w[r]
            if any(abs(a - b) > m * (a + b) for a, b, m in zip(t0, t1, margins)):
                continue
            if state is None:
                state = recompute_state(graph, side, [0] * n)
            rur = pair_rur_score(t0, t1, constraints, used)
            key = (state.cut, rur, tuple(side), combo)
            if best is None or key < best:
                best = key
    return best


def test_oracle_refuses_empty_and_large():
    empty = build_graph(1, [], [])
    cons = make_constraints(1)
    with pytest.raises(OracleError, match="empty graph"):
        oracle_partition(empty, cons)
    big = build_graph(1, [([(1,)], False)] * 25, [(1, [0, 1])])
    with pytest.raises(OracleError, match="too large"):
        oracle_partition(big, cons)


def test_oracle_two_node_forced(two_node_graph):
    cons = make_constraints(2, margin=1.0)
    result = oracle_partition(two_node_graph, cons)
    assert result.cut == 0
    assert result.side == (0, 0)
    assert result.selected == (0, 0)


def test_oracle_margin_forces_split_or_none(two_node_graph):
    # 4 vs 3 on resource 0: together violates, split satisfies, margin 0.2
    result = oracle_partition(two_node_graph, make_constraints(2, margin=0.2))
    assert result.cut == 5
    assert result.side == (0, 1)
    # margin 0.05 rejects every assignment
    assert oracle_partition(two_node_graph, make_constraints(2, margin=0.05)) is None


def test_oracle_breaks_cut_ties_by_rur():
    nodes = [([(4, 0)], False), ([(4, 0), (2, 2)], False)]
    g = build_graph(2, nodes, [])
    result = oracle_partition(g, make_constraints(2, margin=1.0))
    assert result.cut == 0
    assert result.side == (0, 0)
    assert result.selected == (0, 1)
    assert result.rur == pytest.approx(math.sqrt(0.125))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_oracle_matches_unpruned_brute_force(seed):
    g = random_graph(seed, n=6, max_pers=2)
    cons = make_constraints(2, margin=0.3)
    expected = brute_force(g, cons)
    got = oracle_partition(g, cons)
    if expected is None:
        assert got is None
    else:
        cut, rur, side, combo = expected
        assert (got.cut, got.side, got.selected) == (cut, side, combo)
        assert got.rur == pytest.approx(rur)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_oracle_bounds_heuristic(seed):
    g = generate_tiny(seed)
    cons = make_constraints(g.resource_count, margin=0.5)
    truth = oracle_partition(g, cons)
    result = multilevel_partition(g, cons, RefineConfig(coarsest_size=12), seed=seed)
    if truth is None:
        assert not result.feasible
    elif result.feasible:
        assert result.state.cut >= truth.cut
