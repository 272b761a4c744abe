"""Move-selection structures for refinement passes.

Three kinds share one implementation core of gain-indexed LIFO stacks with a
max-gain cursor and lazy invalidation:

* multi-personality buckets: one structure over all unfrozen nodes; the
  highest-gain node with at least one margin-feasible personality wins and
  the personality is chosen by the policy score (tournament).
* resource-affinity queues: one structure per (side, resource); nodes join
  the queues of every resource some personality of theirs is dominated by,
  and selection pulls from the queues of the currently worst resource on its
  over-weight side.
* hybrid: both, preferring the strictly higher gain, then the lower score.

Gain is connectivity-only, so it is personality-independent; personalities
matter for feasibility and scores.  Entries carry global insertion stamps so
LIFO ordering is consistent across structures.
"""

import math
from dataclasses import dataclass

from .graph import ConstraintSet, Hypergraph, PartitionState
from .metrics import is_feasible, rur_pressure


@dataclass(frozen=True, slots=True)
class MoveChoice:
    node: int
    to_side: int
    personality: int
    gain: int
    imbalance_after: float
    rur_after: float
    policy_score: float


class _Stacks:
    """Gain-indexed LIFO stacks with a falling max cursor and lazy staleness."""

    __slots__ = ("off", "stacks", "maxg")

    def __init__(self, off: int, size: int):
        self.off = off
        self.stacks = [[] for _ in range(size)]
        self.maxg = -off  # lowest possible; rises on push

    def push(self, node: int, gain: int, stamp: int):
        self.stacks[gain + self.off].append((node, stamp))
        if gain > self.maxg:
            self.maxg = gain


class PassBuckets:
    """All selection structures for one refinement pass over one state."""

    def __init__(self, graph: Hypergraph, state: PartitionState, constraints: ConstraintSet,
                 margins, policy, kind: str, used=None):
        self.graph = graph
        self.state = state
        self.kind = kind
        self.margins = tuple(margins)
        self.caps = constraints.capacities
        self.targets = constraints.target_rur
        mode = policy[0]
        if mode not in ("imbalance", "rur", "weighted"):
            raise ValueError(f"unknown policy {mode!r}")
        self.mode = mode
        self.alpha = policy[1] if mode == "weighted" else (1.0 if mode == "imbalance" else 0.0)
        self.used = tuple(used) if used is not None else graph.used_resources()
        self.used_idx = tuple(r for r in range(graph.resource_count) if self.used[r])
        self._nbuf = [0.0] * len(self.used_idx)  # scratch for _pair_rur_after
        self.frozen = [False] * graph.num_nodes
        self.gain = [0] * graph.num_nodes
        self.latest = [0] * graph.num_nodes
        self.stamp = 0

        # gain range bound: a node can change the cut by at most its incident weight
        bound = 1
        wsum = [0] * graph.num_nodes
        for e in range(graph.num_edges):
            w = graph.edge_weight[e]
            for v in graph.pins[e]:
                wsum[v] += w
        if wsum:
            bound = max(bound, max(wsum))
        self._off = bound
        self._size = 2 * bound + 1

        c0 = state.counts0
        c1 = state.counts1
        side = state.side
        for v in range(graph.num_nodes):
            g = 0
            for e in graph.incidence[v]:
                w = graph.edge_weight[e]
                if side[v] == 0:
                    mine, other = c0[e], c1[e]
                else:
                    mine, other = c1[e], c0[e]
                if mine == 1:
                    g += w
                if other == 0:
                    g -= w
            self.gain[v] = g

        # rejection cache: while the running totals sit inside the margins, a
        # node can only be rejected because its target side would get too
        # heavy, and no move INTO that side can unblock it; the verdict holds
        # until a move lands on the opposite side.  _blocked[v] stores the
        # direction-epoch token current at rejection time.
        self._blocked = [-1] * graph.num_nodes
        self._bepoch = [0, 1]  # per target side; parity keeps tokens distinct
        self._in_margin = is_feasible(state.totals[0], state.totals[1], self.margins)

        self.mp = None
        self.ra = None
        if kind in ("mp", "hybrid"):
            self.mp = _Stacks(self._off, self._size)
        if kind in ("ra", "hybrid"):
            r_count = graph.resource_count
            self.ra = [[_Stacks(self._off, self._size) for _ in range(r_count)] for _ in range(2)]
            self.membership = self._memberships()
        for v in range(graph.num_nodes):
            self._push(v)

    def _memberships(self):
        """Queue sets per node: resources that dominate some personality by capacity share."""
        out = []
        caps = self.caps
        for plist in self.graph.pweights:
            rs = set()
            for w in plist:
                best = -1.0
                arg = []
                for r in range(len(w)):
                    share = w[r] / caps[r]
                    if share > best + 1e-12:
                        best = share
                        arg = [r]
                    elif share > best - 1e-12:
                        arg.append(r)
                rs.update(arg)
            out.append(tuple(sorted(rs)))
        return out

    def _push(self, v: int):
        self.stamp += 1
        self.latest[v] = self.stamp
        g = self.gain[v]
        if self.mp is not None:
            self.mp.push(v, g, self.stamp)
        if self.ra is not None:
            s = self.state.side[v]
            for r in self.membership[v]:
                self.ra[s][r].push(v, g, self.stamp)

    # -- personality tournament ------------------------------------------------

    def _choose(self, v: int):
        """Best feasible personality for moving v, or None.

        Minimizes the policy score; ties go to the lowest personality id.
        Returns (pid, imbalance_after, rur_after, policy_score).
        """
        state = self.state
        graph = self.graph
        s = state.side[v]
        tf = state.totals[s]
        tt = state.totals[1 - s]
        wc = graph.pweights[v][state.selected[v]]
        plist = graph.pweights[v][:1] if graph.locked[v] else graph.pweights[v]
        margins = self.margins
        alpha = self.alpha
        need_imb = alpha > 0.0
        need_rur = alpha < 1.0
        r_count = graph.resource_count
        after = [tf[r] - wc[r] for r in range(r_count)]
        best = None
        for pid, wp in enumerate(plist):
            feasible = True
            for r in range(r_count):
                a = after[r]
                b = tt[r] + wp[r]
                if abs(a - b) > margins[r] * (a + b):
                    feasible = False
                    break
            if not feasible:
                continue
            imb = self._imbalance_after(tf, tt, wc, wp) if need_imb else 0.0
            rur = self._pair_rur_after(tf, tt, wc, wp, s) if need_rur else 0.0
            score = alpha * imb + (1.0 - alpha) * rur
            if best is None or score < best[3]:
                best = (pid, imb, rur, score)
        if best is None:
            if self._in_margin:
                self._blocked[v] = self._bepoch[1 - s]
            return None
        pid, imb, rur, score = best
        # fill the metric the policy skipped so the MoveChoice record is complete
        wp = plist[pid]
        if not need_imb:
            imb = self._imbalance_after(tf, tt, wc, wp)
        if not need_rur:
            rur = self._pair_rur_after(tf, tt, wc, wp, s)
        return pid, imb, rur, score

    def _imbalance_after(self, tf, tt, wc, wp):
        """RMS of |delta|/total over used, nonzero-total resources."""
        acc = 0.0
        n = 0
        for r in self.used_idx:
            a = tf[r] - wc[r]
            b = tt[r] + wp[r]
            t = a + b
            if t == 0:
                continue
            f = (a - b) / t
            acc += f * f
            n += 1
        return math.sqrt(acc / n) if n else 0.0

    def _pair_rur_after(self, tf, tt, wc, wp, s):
        caps = self.caps
        targets = self.targets
        used_idx = self.used_idx
        norms = self._nbuf
        n = len(norms)
        total = 0.0
        for a_side in (0, 1):
            if a_side == s:
                for i, r in enumerate(used_idx):
                    norms[i] = ((tf[r] - wc[r]) / caps[r]) / targets[r]
            else:
                for i, r in enumerate(used_idx):
                    norms[i] = ((tt[r] + wp[r]) / caps[r]) / targets[r]
            m = sum(norms) / n
            a = 0.0
            if m != 0.0:
                dev = 0.0
                for x in norms:
                    d = (x - m) / m
                    dev += d * d
                a = math.sqrt(dev / n)
            total += a * a
        return rur_pressure(math.sqrt(total / 2.0))

    # -- selectors ---------------------------------------------------------------

    def _scan(self, stacks: _Stacks, floor_gain=None):
        """Yield (gain, stamp, node) in descending (gain, stamp) order, pruning
        stale tail entries; skips entries whose rejection token is still
        current but otherwise leaves feasibility-rejected entries in place."""
        g = stacks.maxg
        off = stacks.off
        arr = stacks.stacks
        gain = self.gain
        frozen = self.frozen
        latest = self.latest
        blocked = self._blocked
        bepoch = self._bepoch
        side = self.state.side
        while g >= -off:
            if floor_gain is not None and g < floor_gain:
                return
            stack = arr[g + off]
            i = len(stack) - 1
            trimming = True
            while i >= 0:
                v, stamp = stack[i]
                if frozen[v] or gain[v] != g or latest[v] != stamp:
                    if trimming:
                        stack.pop()
                    i -= 1
                    continue
                trimming = False
                if blocked[v] == bepoch[1 - side[v]]:
                    i -= 1
                    continue
                yield g, stamp, v
                i -= 1
            if not stack and g == stacks.maxg:
                stacks.maxg -= 1
            g -= 1

    def select_mp(self):
        """Highest-gain node with a feasible personality; LIFO on gain ties."""
        for g, stamp, v in self._scan(self.mp):
            got = self._choose(v)
            if got is not None:
                pid, imb, rur, score = got
                return MoveChoice(v, 1 - self.state.side[v], pid, g, imb, rur, score)
        return None

    def _badness(self):
        """Per-resource pressure used to pick the RA target resource."""
        t0, t1 = self.state.totals
        caps = self.caps
        targets = self.targets
        used_idx = self.used_idx
        out = [0.0] * self.graph.resource_count
        norms = {0: [], 1: []}
        means = {}
        if self.mode != "imbalance":
            for s, t in ((0, t0), (1, t1)):
                ns = [(t[r] / caps[r]) / targets[r] for r in used_idx]
                norms[s] = ns
                means[s] = sum(ns) / len(ns) if ns else 0.0
        for i, r in enumerate(used_idx):
            t = t0[r] + t1[r]
            f = abs(t0[r] - t1[r]) / t if t else 0.0
            dev = 0.0
            if self.mode != "imbalance":
                for s in (0, 1):
                    m = means[s]
                    if m != 0.0:
                        dev = max(dev, abs(norms[s][i] - m) / m)
            out[r] = self.alpha * f + (1.0 - self.alpha) * dev
        return out

    def select_ra(self):
        """Pull from the worst resource's over-side queue, next-worst on failure."""
        bad = self._badness()
        t0, t1 = self.state.totals
        groups: dict[float, list[int]] = {}
        for r in self.used_idx:
            groups.setdefault(round(bad[r], 12), []).append(r)
        best_choice = None
        for key in sorted(groups, reverse=True):
            queues = []
            for r in groups[key]:
                if t0[r] > t1[r]:
                    queues.append(self.ra[0][r])
                elif t1[r] > t0[r]:
                    queues.append(self.ra[1][r])
                else:
                    queues.append(self.ra[0][r])
                    queues.append(self.ra[1][r])
            choice = self._scan_union(queues)
            if choice is not None:
                return choice
        return None

    def _scan_union(self, queues):
        """Highest (gain, stamp) feasible entry across queues."""
        iters = [self._scan(q) for q in queues]
        heads = []
        for it in iters:
            head = next(it, None)
            heads.append(head)
        while True:
            best_i = -1
            best_key = None
            for i, head in enumerate(heads):
                if head is None:
                    continue
                key = (head[0], head[1])
                if best_key is None or key > best_key:
                    best_key = key
                    best_i = i
            if best_i < 0:
                return None
            g, stamp, v = heads[best_i]
            got = self._choose(v)
            if got is not None:
                pid, imb, rur, score = got
                return MoveChoice(v, 1 - self.state.side[v], pid, g, imb, rur, score)
            heads[best_i] = next(iters[best_i], None)

    def select_hybrid(self):
        """Strictly higher gain wins; gain ties go to the lower policy score."""
        a = self.select_mp()
        b = self.select_ra()
        if a is None:
            return b
        if b is None:
            return a
        if a.gain != b.gain:
            return a if a.gain > b.gain else b
        return a if a.policy_score <= b.policy_score else b

    def select(self):
        if self.kind == "mp":
            return self.select_mp()
        if self.kind == "ra":
            return self.select_ra()
        return self.select_hybrid()

    # -- move application + incremental gain maintenance -------------------------

    def apply(self, choice: MoveChoice) -> int:
        """Apply the chosen move, freeze the node, update neighbor gains."""
        v = choice.node
        graph = self.graph
        state = self.state
        side = state.side
        from_side = side[v]
        cf = state.counts0 if from_side == 0 else state.counts1
        ct = state.counts1 if from_side == 0 else state.counts0
        frozen = self.frozen
        deltas: dict[int, int] = {}

        for e in graph.incidence[v]:
            w = graph.edge_weight[e]
            pins = graph.pins[e]
            t_count = ct[e]
            if t_count == 0:
                for u in pins:
                    if u != v and not frozen[u]:
                        deltas[u] = deltas.get(u, 0) + w
            elif t_count == 1:
                for u in pins:
                    if u != v and side[u] != from_side:
                        if not frozen[u]:
                            deltas[u] = deltas.get(u, 0) - w
                        break
            f_count = cf[e] - 1  # from-side pins after the move
            if f_count == 0:
                for u in pins:
                    if u != v and not frozen[u]:
                        deltas[u] = deltas.get(u, 0) - w
            elif f_count == 1:
                for u in pins:
                    if u != v and side[u] == from_side:
                        if not frozen[u]:
                            deltas[u] = deltas.get(u, 0) + w
                        break

        realized = state.apply_move(v, choice.to_side, choice.personality)
        frozen[v] = True
        # weight left side 1-to_side, so rejections aimed there may clear
        self._bepoch[1 - choice.to_side] += 2
        self._in_margin = True
        for u, d in deltas.items():
            if d:
                self.gain[u] += d
                self._push(u)
        return realized


def mp_bucket_select(buckets: PassBuckets):
    return buckets.select_mp()


def ra_bucket_select(buckets: PassBuckets):
    return buckets.select_ra()


def hybrid_select(buckets: PassBuckets):
    return buckets.select_hybrid()


def update_after_move(buckets: PassBuckets, choice: MoveChoice) -> int:
    return buckets.apply(choice)
