"""Partition quality metrics: cut, balance score, utilization-ratio score.

All scores are root-mean-square aggregates over the *used* resources so a
device with idle resource classes is not penalized for them.
"""

import math
from dataclasses import dataclass

from .graph import ConstraintSet, Hypergraph, PartitionState


class MetricError(ValueError):
    pass


def cut_size(state: PartitionState) -> int:
    """Weighted sum of edges with pins on both sides."""
    cut = 0
    w = state.graph.edge_weight
    c0 = state.counts0
    c1 = state.counts1
    for e in range(state.graph.num_edges):
        if c0[e] > 0 and c1[e] > 0:
            cut += w[e]
    return cut


def imbalance_score(totals0, totals1, used=None) -> float:
    """RMS over used resources of |delta_r| / T_r with T_r the graph total.

    Resources with T_r = 0 are skipped; if every resource is weightless the
    score is undefined and we refuse rather than return 0.
    """
    fs = []
    for r in range(len(totals0)):
        t = totals0[r] + totals1[r]
        if t == 0:
            continue
        if used is not None and not used[r]:
            continue
        fs.append(abs(totals0[r] - totals1[r]) / t)
    if not fs:
        raise MetricError("weightless graph: no resource has positive total weight")
    return math.sqrt(sum(f * f for f in fs) / len(fs))


def rur_score(part_totals, constraints: ConstraintSet, used=None) -> float:
    """Deviation of one side's utilization mix from the target ratio.

    util_r = totals[r] / capacity[r], norm_r = util_r / target_r.  The score
    is the RMS relative spread of norm_r around its mean over used resources.
    A side using nothing scores 0 (no mix to deviate).
    """
    norms = []
    for r in range(len(part_totals)):
        if used is not None and not used[r]:
            continue
        util = part_totals[r] / constraints.capacities[r]
        norms.append(util / constraints.target_rur[r])
    if not norms:
        return 0.0
    mean = sum(norms) / len(norms)
    if mean == 0.0:
        return 0.0
    acc = 0.0
    for x in norms:
        d = (x - mean) / mean
        acc += d * d
    return math.sqrt(acc / len(norms))


def pair_rur_score(totals0, totals1, constraints: ConstraintSet, used=None) -> float:
    """RMS of the two per-side utilization-ratio scores."""
    a = rur_score(totals0, constraints, used)
    b = rur_score(totals1, constraints, used)
    return math.sqrt((a * a + b * b) / 2.0)


# Move-time and pass-time policies treat the ratio score as satisficing:
# pressure applies only while the deviation exceeds this tolerance, so the
# ratio never outranks cut or balance once the mix is close enough.  Offline
# remaps score at full precision.
RUR_TOLERANCE = 0.04


def rur_pressure(x: float, tolerance: float = RUR_TOLERANCE) -> float:
    """Excess of a ratio score over the satisficing tolerance (>= 0)."""
    return x - tolerance if x > tolerance else 0.0


def per_resource_imbalance(totals0, totals1) -> list[float]:
    """f_r = |delta_r| / T_r per resource (0 when the resource is weightless)."""
    out = []
    for r in range(len(totals0)):
        t = totals0[r] + totals1[r]
        out.append(abs(totals0[r] - totals1[r]) / t if t else 0.0)
    return out


def balance_violations(totals0, totals1, margins) -> list[float]:
    """Per-resource excess of |delta_r| over margin_r * T_r (0 when satisfied).

    Resources with zero total are trivially satisfied.
    """
    out = []
    for r in range(len(totals0)):
        t = totals0[r] + totals1[r]
        if t == 0:
            out.append(0.0)
            continue
        out.append(max(0.0, abs(totals0[r] - totals1[r]) - margins[r] * t))
    return out


def is_feasible(totals0, totals1, margins) -> bool:
    for r in range(len(totals0)):
        t = totals0[r] + totals1[r]
        if abs(totals0[r] - totals1[r]) > margins[r] * t:
            return False
    return True


def max_violation_ratio(totals0, totals1, margins) -> float:
    """Worst-resource |delta_r| / (margin_r * T_r); <= 1 means feasible."""
    worst = 0.0
    for r in range(len(totals0)):
        t = totals0[r] + totals1[r]
        if t == 0:
            continue
        ratio = abs(totals0[r] - totals1[r]) / (margins[r] * t)
        if ratio > worst:
            worst = ratio
    return worst


@dataclass(frozen=True, slots=True)
class ScoreReport:
    """Full quality readout for one bipartition."""

    cut: int
    imbalance: float
    rur: float
    rur_side0: float
    rur_side1: float
    totals0: tuple[int, ...]
    totals1: tuple[int, ...]
    feasible: bool
    violations: tuple[float, ...]
    max_violation: float

    def as_dict(self) -> dict:
        return {
            "cut": self.cut,
            "imbalance": self.imbalance,
            "rur": self.rur,
            "rur_side0": self.rur_side0,
            "rur_side1": self.rur_side1,
            "totals0": list(self.totals0),
            "totals1": list(self.totals1),
            "feasible": self.feasible,
            "violations": list(self.violations),
            "max_violation": self.max_violation,
        }


def score_partition(state: PartitionState, constraints: ConstraintSet, used=None) -> ScoreReport:
    """Score a partition; ``used`` defaults to the graph's capability mask."""
    if used is None:
        used = state.graph.used_resources()
    t0, t1 = state.totals
    viol = balance_violations(t0, t1, constraints.margins)
    return ScoreReport(
        cut=state.cut,
        imbalance=imbalance_score(t0, t1, used),
        rur=pair_rur_score(t0, t1, constraints, used),
        rur_side0=rur_score(t0, constraints, used),
        rur_side1=rur_score(t1, constraints, used),
        totals0=tuple(t0),
        totals1=tuple(t1),
        feasible=all(v == 0.0 for v in viol),
        violations=tuple(viol),
        max_violation=max_violation_ratio(t0, t1, constraints.margins),
    )


# Default device mix, in weight units relative to the common resource.  The
# shape mimics a large heterogeneous FPGA where specialized blocks are a thin
# slice of the fabric; it is a config value, not ground truth.
DEVICE_RATIO = (1.0, 0.02, 0.015)


def auto_capacities(graph: Hypergraph, fill: float = 0.7, ratio=None) -> tuple[int, ...]:
    """Fixed-mix device capacities scaled so the binding resource sits at ``fill``.

    The capacity *mix* follows ``ratio`` (default DEVICE_RATIO, padded with its
    last entry); only the overall scale adapts to the graph, so utilization
    ratios keep the design-vs-device mismatch that RUR scoring measures.
    """
    if ratio is None:
        ratio = DEVICE_RATIO
    r_count = graph.resource_count
    mix = [ratio[min(r, len(ratio) - 1)] for r in range(r_count)]
    if any(m <= 0 for m in mix):
        raise MetricError("capacity ratio entries must be positive")
    scale = 0.0
    for r, t in enumerate(graph.max_totals()):
        if t > 0:
            scale = max(scale, t / mix[r])
    if scale == 0.0:
        return (1,) * r_count
    return tuple(max(1, round(m * scale / fill)) for m in mix)
