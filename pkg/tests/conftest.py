import random

import pytest

from mppart import ConstraintSet, build_graph, recompute_state

CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)


def make_constraints(r_count=2, margin=0.5, caps=None, targets=None):
    return ConstraintSet(
        margins=(margin,) * r_count,
        target_rur=targets if targets is not None else (1.0,) * r_count,
        capacities=caps if caps is not None else (1000,) * r_count,
    )


def random_graph(seed, n=8, r_count=2, max_pers=3, edge_count=None):
    """Small random multi-personality graph for property tests."""
    rng = random.Random(seed)
    nodes = []
    for _ in range(n):
        k = rng.randint(1, max_pers)
        pers = set()
        while len(pers) < k:
            w = tuple(rng.randint(0, 5) for _ in range(r_count))
            if any(w):
                pers.add(w)
        locked = rng.random() < 0.1
        nodes.append((sorted(pers), locked))
    m = edge_count if edge_count is not None else rng.randint(1, 2 * n)
    edges = []
    for _ in range(m):
        k = rng.randint(2, min(4, n))
        pins = rng.sample(range(n), k)
        edges.append((rng.randint(1, 6), pins))
    return build_graph(r_count, nodes, edges)


def random_state(graph, seed):
    rng = random.Random(seed)
    side = [rng.randint(0, 1) for _ in range(graph.num_nodes)]
    selected = [
        0 if graph.locked[v] else rng.randrange(len(graph.pweights[v]))
        for v in range(graph.num_nodes)
    ]
    return recompute_state(graph, side, selected)


@pytest.fixture
def two_node_graph():
    # one edge of weight 5 joining two single-personality nodes
    return build_graph(2, [([(4, 0)], False), ([(3, 0)], False)], [(5, [0, 1])])


@pytest.fixture
def path4_graph():
    nodes = [([(1, 0)], False) for _ in range(4)]
    edges = [(1, [0, 1]), (1, [1, 2]), (1, [2, 3])]
    return build_graph(2, nodes, edges)
