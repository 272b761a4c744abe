"""Seeded synthetic benchmark generator.

Produces hypergraphs that mimic heterogeneous netlists: a common resource
(class 0) every implementation can fall back to, plus specialized resource
classes touched by a configurable fraction of nodes.  Nodes capable of a
specialized resource get a full-specialized personality, sometimes a lighter
hybrid variant, and a common-only personality listed last; a small share of
nodes is purely specialized and has no common-only fallback.  Edge sizes
follow the usual netlist profile: mostly 2-pin, a short power-law fanout
tail, and window-local pins so clustered resource blocks stay interconnected.
"""

import math
import random
from dataclasses import dataclass, field

from .graph import Hypergraph, build_graph


class ProfileError(ValueError):
    pass


# name -> (per-resource capability fractions, clustering mode)
PRESETS = {
    "sha": ((1.00, 0.15, 0.00), "uniform"),
    "diffeq1": ((1.00, 0.38, 0.00), "uniform"),
    "blob": ((1.00, 0.24, 0.00), "uniform"),
    "jet": ((1.00, 0.32, 0.00), "clustered"),
    "rct": ((1.00, 0.31, 0.12), "clustered"),
    "memplus": ((0.98, 0.02, 0.40), "clustered"),
    "cti": ((0.97, 0.14, 0.02), "uniform"),
    "wave": ((0.98, 0.06, 0.05), "clustered"),
    "fe_tooth": ((0.98, 0.04, 0.04), "uniform"),
    "boundtop": ((1.00, 0.005, 0.14), "clustered"),
}

DEFAULT_WEIGHT_RANGES = ((1, 16), (2, 10), (3, 12))

# common-resource units one specialized unit converts into
COMMON_PER_SPECIALIZED = 3


@dataclass(frozen=True)
class BenchmarkProfile:
    """Knobs for one synthetic benchmark; deterministic given the seed."""

    node_count: int
    fractions: tuple[float, ...]
    mode: str = "uniform"
    personality_counts: tuple[tuple[int, float], ...] = ((2, 0.7), (3, 0.3))
    weight_ranges: tuple[tuple[int, int], ...] = DEFAULT_WEIGHT_RANGES
    p: float = 0.5
    seed: int = 0
    locked_fraction: float = 0.03
    edge_factor: float = 1.25
    name: str = ""

    def __post_init__(self):
        if self.node_count < 2:
            raise ProfileError("node_count must be >= 2")
        if not self.fractions or not all(0.0 <= f <= 1.0 for f in self.fractions):
            raise ProfileError("fractions must lie in [0, 1]")
        if len(self.weight_ranges) < len(self.fractions):
            raise ProfileError("need a weight range per resource")
        for lo, hi in self.weight_ranges[: len(self.fractions)]:
            if lo < 1 or hi < lo:
                raise ProfileError("weight ranges must satisfy 1 <= lo <= hi")
        if self.mode not in ("uniform", "clustered"):
            raise ProfileError(f"unknown clustering mode {self.mode!r}")
        if not (0.0 <= self.p <= 1.0):
            raise ProfileError("binomial p must lie in [0, 1]")
        if not (0.0 <= self.locked_fraction < 1.0):
            raise ProfileError("locked_fraction must lie in [0, 1)")
        if self.edge_factor <= 0:
            raise ProfileError("edge_factor must be positive")
        counts = [c for c, _ in self.personality_counts]
        probs = [q for _, q in self.personality_counts]
        if any(c < 2 for c in counts) or any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ProfileError("personality_counts must map counts >= 2 to probabilities summing to 1")
        if self.fractions[0] < 1.0 and all(f == 0.0 for f in self.fractions[1:]):
            raise ProfileError("common fraction < 1 needs at least one specialized class to absorb the rest")
        if len(self.fractions) == 1 and self.fractions[0] < 1.0:
            raise ProfileError("single-resource profile must have fraction 1.0")


def preset_profile(name: str, node_count: int, seed: int = 0) -> BenchmarkProfile:
    if name not in PRESETS:
        raise ProfileError(f"unknown preset {name!r} (choose from {sorted(PRESETS)})")
    fractions, mode = PRESETS[name]
    return BenchmarkProfile(node_count=node_count, fractions=fractions, mode=mode, seed=seed, name=name)


def _binom(rng: random.Random, n: int, p: float) -> int:
    hits = 0
    for _ in range(n):
        if rng.random() < p:
            hits += 1
    return hits


def _draw_count(rng: random.Random, dist) -> int:
    x = rng.random()
    acc = 0.0
    for count, q in dist:
        acc += q
        if x < acc:
            return count
    return dist[-1][0]


def _specialized_sets(rng: random.Random, profile: BenchmarkProfile) -> list[set[int]]:
    """Per specialized resource, the node ids capable of it."""
    n = profile.node_count
    sets: list[set[int]] = []
    for f in profile.fractions[1:]:
        count = min(n, int(f * n + 0.5))
        if count == 0:
            sets.append(set())
        elif profile.mode == "clustered":
            start = rng.randrange(n)
            sets.append({(start + i) % n for i in range(count)})
        else:
            sets.append(set(rng.sample(range(n), count)))
    return sets


def _edge_sizes_cdf(n: int):
    kmax = min(32, n)
    sizes = list(range(3, kmax + 1))
    if not sizes:
        return [], []
    weights = [k ** -2.5 for k in sizes]
    total = sum(weights)
    acc = 0.0
    cdf = []
    for w in weights:
        acc += w / total
        cdf.append(acc)
    return sizes, cdf


def generate(profile: BenchmarkProfile) -> Hypergraph:
    """Build the hypergraph for a profile; same profile and seed give identical graphs."""
    rng = random.Random(profile.seed)
    n = profile.node_count
    r_total = len(profile.fractions)
    ranges = profile.weight_ranges[:r_total]

    spec_sets = _specialized_sets(rng, profile)
    capable = set()
    for s in spec_sets:
        capable |= s
    caps_of = {v: [ri + 1 for ri, s in enumerate(spec_sets) if v in s] for v in capable}

    pure_target = int((1.0 - profile.fractions[0]) * n + 0.5)
    if pure_target > len(capable):
        raise ProfileError(
            f"profile needs {pure_target} nodes without the common resource but only "
            f"{len(capable)} nodes are specialized-capable"
        )
    pure = set(rng.sample(sorted(capable), pure_target)) if pure_target else set()

    # Locks model immovable anchors; drawing them from the common-only pool keeps
    # every specialized resource fully remappable.
    common_only = [v for v in range(n) if v not in capable]
    lock_target = min(len(common_only), int(profile.locked_fraction * n + 0.5))
    locked = set(rng.sample(common_only, lock_target)) if lock_target else set()

    lo0, hi0 = ranges[0]

    def specialized_vector(caps, with_glue: bool):
        w = [0] * r_total
        if with_glue:
            w[0] = 1 + _binom(rng, 3, profile.p)
        for ri in caps:
            lo, hi = ranges[ri]
            w[ri] = lo + _binom(rng, hi - lo, profile.p)
        return w

    nodes = []
    for v in range(n):
        if v not in capable:
            c = lo0 + _binom(rng, hi0 - lo0, profile.p)
            nodes.append(([(c,) + (0,) * (r_total - 1)], v in locked))
            continue
        caps = caps_of[v]
        want = _draw_count(rng, profile.personality_counts)
        is_pure = v in pure
        v1 = specialized_vector(caps, with_glue=not is_pure)
        pers = [tuple(v1)]
        if want >= 3:
            if is_pure:
                v2 = specialized_vector(caps, with_glue=False)
                if tuple(v2) == tuple(v1):
                    v2[caps[0]] += 1
            else:
                # hybrid: shed half the specialized load into common fabric
                v2 = [0] * r_total
                shed = 0
                for ri in caps:
                    keep = (v1[ri] + 1) // 2
                    v2[ri] = keep
                    shed += v1[ri] - keep
                v2[0] = v1[0] + COMMON_PER_SPECIALIZED * shed + _binom(rng, 2, profile.p)
                if tuple(v2) == tuple(v1):
                    v2[0] += 1
            pers.append(tuple(v2))
        if not is_pure:
            c = v1[0] + COMMON_PER_SPECIALIZED * sum(v1[ri] for ri in caps) + _binom(rng, 4, profile.p)
            pers.append((c,) + (0,) * (r_total - 1))
        nodes.append((pers, False))

    m = int(profile.edge_factor * n + 0.5)
    sizes, cdf = _edge_sizes_cdf(n)
    edges = []
    for _ in range(m):
        if n < 3 or rng.random() < 0.7 or not sizes:
            k = 2
        else:
            x = rng.random()
            k = sizes[-1]
            for s, c in zip(sizes, cdf):
                if x < c:
                    k = s
                    break
        if rng.random() < 0.1:
            pins = rng.sample(range(n), k)
        else:
            window = max(8, 4 * k)
            if window >= n:
                pins = rng.sample(range(n), k)
            else:
                anchor = rng.randrange(n)
                lo = min(anchor, n - window)
                pins = rng.sample(range(lo, lo + window), k)
        weight = 1 + _binom(rng, 2, 0.1)
        edges.append((weight, pins))

    return build_graph(r_total, nodes, edges)


def generate_tiny(seed: int, max_nodes: int = 10, max_resources: int = 3) -> Hypergraph:
    """Small random instance for oracle cross-checks (<= 2 personalities per node)."""
    rng = random.Random(seed)
    n = rng.randint(4, max_nodes)
    r = rng.randint(1, max_resources)
    nodes = []
    for _ in range(n):
        k = rng.randint(1, 2)
        pers = []
        seen = set()
        while len(pers) < k:
            w = tuple(rng.randint(0, 6) for _ in range(r))
            if not any(w) or w in seen:
                continue
            seen.add(w)
            pers.append(w)
        nodes.append((pers, False))
    m = rng.randint(n - 1, n + 3)
    edges = []
    for _ in range(m):
        k = rng.randint(2, min(3, n))
        pins = rng.sample(range(n), k)
        edges.append((rng.randint(1, 3), pins))
    return build_graph(r, nodes, edges)
