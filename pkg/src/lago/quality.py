"""Longitudinal Modularity and exact local move gains.

For a community ``C`` with internal interaction count ``I_C``, summed member
degree ``K_C``, ``S_C = sum_u k_u sqrt(|T_{u in C}|)`` and existence time
``|T_C|``, the ordered-pair sums collapse to

    observed  = 2 I_C
    JM        = K_C**2 / (2m) * |T_C| / |T|
    MM        = S_C**2 / (2m |T|)

so the score is a sum of per-community terms minus the switch penalty.  A move
only touches the source and target communities, which is what
:class:`IncrementalQuality` exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .community import NEW, DynamicCommunityStructure, check_valid
from .exceptions import (
    EmptyStream,
    InstanceTooLarge,
    InvalidStructure,
    NotInSource,
    SameCommunity,
    UnknownNode,
)
from .linkstream import LinkStream

__all__ = [
    "IncrementalQuality",
    "QualityBreakdown",
    "QualityConfig",
    "delta_move",
    "expectation_jm",
    "expectation_mm",
    "q_score",
    "q_score_naive",
]

EXPECTATIONS = ("JM", "MM")
NAIVE_LIMIT = 10_000


@dataclass(frozen=True)
class QualityConfig:
    """Which null model to use and how strongly to penalize switches."""

    expectation: str = "MM"
    omega: float = 1.0

    def __post_init__(self):
        if self.expectation not in EXPECTATIONS:
            raise ValueError(f"expectation must be one of {EXPECTATIONS}, got {self.expectation!r}")
        if not self.omega >= 0 or math.isinf(self.omega):
            raise ValueError(f"omega must be a finite non-negative number, got {self.omega!r}")


@dataclass(frozen=True)
class QualityBreakdown:
    observed_fraction: float
    expected_fraction: float
    switch_penalty: float
    total: float
    num_communities: int = 0
    sum_csc: int = 0

    def to_dict(self) -> dict:
        return {
            "q": self.total,
            "observed": self.observed_fraction,
            "expected": self.expected_fraction,
            "switch_penalty": self.switch_penalty,
            "num_communities": self.num_communities,
            "sum_csc": self.sum_csc,
        }


def _check_nodes(stream, *nodes):
    for u in nodes:
        if str(u) not in stream._index:
            raise UnknownNode(u)


def expectation_jm(stream: LinkStream, community, u, v) -> float:
    """Joint-membership expected interactions of ``u`` and ``v`` inside ``community``."""
    _check_nodes(stream, u, v)
    if community.duration(u) * community.duration(v) == 0:
        return 0.0
    k_u, k_v = stream.degree[str(u)], stream.degree[str(v)]
    return k_u * k_v / (2 * stream.m) * community.existence_duration / stream.n_ticks


def expectation_mm(stream: LinkStream, community, u, v) -> float:
    """Mean-membership expected interactions of ``u`` and ``v`` inside ``community``."""
    _check_nodes(stream, u, v)
    k_u, k_v = stream.degree[str(u)], stream.degree[str(v)]
    overlap = math.sqrt(community.duration(u) * community.duration(v))
    return k_u * k_v / (2 * stream.m) * overlap / stream.n_ticks


def _require_scorable(stream, structure):
    if stream.m == 0:
        raise EmptyStream()
    check_valid(structure)


def q_score(stream: LinkStream, structure: DynamicCommunityStructure,
            config: QualityConfig) -> QualityBreakdown:
    """Longitudinal Modularity of ``structure`` from per-community aggregates."""
    _require_scorable(stream, structure)
    two_m = 2 * stream.m
    n_ticks = stream.n_ticks
    labels = structure.labels()
    internal = {}
    for a, b in stream._atn_edges:
        if labels[a] == labels[b]:
            internal[labels[a]] = internal.get(labels[a], 0) + 1

    degree = stream.degree
    observed = expected = 0.0
    for cid, com in structure.communities.items():
        observed += 2 * internal.get(cid, 0)
        if config.expectation == "JM":
            k_sum = sum(degree[u] for u in com.members if com.duration(u) > 0)
            expected += k_sum * k_sum * com.existence_duration / (two_m * n_ticks)
        else:
            s_sum = sum(degree[u] * math.sqrt(com.duration(u)) for u in com.members)
            expected += s_sum * s_sum / (two_m * n_ticks)
    sum_csc = structure.sum_csc()
    return _breakdown(observed / two_m, expected / two_m, config.omega * sum_csc / two_m,
                      len(structure.communities), sum_csc)


def _breakdown(observed, expected, penalty, ncom, sum_csc):
    return QualityBreakdown(observed, expected, penalty, observed - expected - penalty,
                            ncom, sum_csc)


def q_score_naive(stream: LinkStream, structure: DynamicCommunityStructure,
                  config: QualityConfig) -> QualityBreakdown:
    """Direct evaluation over communities and ordered node pairs, no caching.

    Meant as ground truth for small instances only.
    """
    if stream.n_active > NAIVE_LIMIT:
        raise InstanceTooLarge(f"naive scoring is limited to {NAIVE_LIMIT} active time nodes")
    _require_scorable(stream, structure)
    expectation = expectation_jm if config.expectation == "JM" else expectation_mm
    two_m = 2 * stream.m
    observed = expected = 0.0
    for com in structure.communities.values():
        ticks = {u: com.ticks(u) for u in stream.nodes}
        for u in stream.nodes:
            for v in stream.nodes:
                if u != v:
                    observed += stream.interactions_between(u, v, ticks[u] & ticks[v])
                expected += expectation(stream, com, u, v)
    switches = 0
    for u in stream.nodes:
        runs = sorted((iv, cid) for cid, com in structure.communities.items()
                      for iv in com.members.get(u, ()))
        changes = sum(1 for (_, c1), (_, c2) in zip(runs, runs[1:]) if c1 != c2)
        switches += changes
    return _breakdown(observed / two_m, expected / two_m, config.omega * switches / two_m,
                      len(structure.communities), switches)


# -- incremental evaluation -----------------------------------------------------


class _Com:
    __slots__ = ("members", "dur", "cov", "K", "S", "I")

    def __init__(self):
        self.members = set()
        self.dur = {}      # node -> |T_{u in C}|
        self.cov = {}      # tick -> number of member runs covering it (JM only)
        self.K = 0
        self.S = 0.0
        self.I = 0


class _Prepared:
    """Target-independent part of a move evaluation."""

    __slots__ = ("X", "source", "within", "cross", "rem", "base_add", "bgaps",
                 "d_eta_source", "base_ranges", "rem_ticks", "source_term", "temporal",
                 "_base_set")

    def base_ticks(self):
        if self._base_set is None:
            self._base_set = {t for lo, hi in self.base_ranges for t in range(lo, hi + 1)}
        return self._base_set


class IncrementalQuality:
    """Mutable assignment of active time nodes with O(move) gain evaluation.

    Parameters
    ----------
    stream : LinkStream
    config : QualityConfig
    labels : sequence of int, optional
        Initial community per active time node; defaults to singletons.
    """

    def __init__(self, stream: LinkStream, config: QualityConfig, labels=None):
        if stream.m == 0:
            raise EmptyStream()
        self.stream = stream
        self.config = config
        self.jm = config.expectation == "JM"
        self.omega = float(config.omega)
        self.two_m = 2 * stream.m
        self.n_ticks = stream.n_ticks
        n = stream.n_active
        self.node = stream._atn_node
        self.tick = stream._atn_tick
        self.adj = stream._atn_adj
        offsets = stream._node_offsets
        self.prev = [i - 1 if i > offsets[u] else -1 for i, u in enumerate(self.node)]
        self.next = [i + 1 if i + 1 < offsets[u + 1] else -1 for i, u in enumerate(self.node)]
        self.k = stream._deg
        self.label = list(range(n)) if labels is None else [int(x) for x in labels]
        if len(self.label) != n:
            raise ValueError(f"expected {n} labels, got {len(self.label)}")
        self.next_id = max(self.label, default=-1) + 1
        self.evaluations = 0
        self._rebuild()

    # -- bookkeeping ---------------------------------------------------------

    def _rebuild(self):
        comms = {}
        label, node, tick, nxt = self.label, self.node, self.tick, self.next
        eta = 0
        for i, c in enumerate(label):
            com = comms.get(c)
            if com is None:
                com = comms[c] = _Com()
            com.members.add(i)
            u = node[i]
            span = 1
            j = nxt[i]
            if j >= 0:
                if label[j] == c:
                    span += tick[j] - tick[i] - 1
                    if self.jm:
                        for t in range(tick[i] + 1, tick[j]):
                            com.cov[t] = com.cov.get(t, 0) + 1
                else:
                    eta += 1
            com.dur[u] = com.dur.get(u, 0) + span
            if self.jm:
                com.cov[tick[i]] = com.cov.get(tick[i], 0) + 1
        for a, b in self.stream._atn_edges:
            if label[a] == label[b]:
                comms[label[a]].I += 1
        for com in comms.values():
            self._refresh(com)
        self.comms = comms
        self.eta = eta

    def _refresh(self, com):
        k = self.k
        com.K = sum(k[u] for u in com.dur)
        com.S = math.fsum(k[u] * math.sqrt(d) for u, d in com.dur.items())

    def _expected(self, K, S, tc):
        if self.jm:
            return K * K * tc / (self.two_m * self.n_ticks)
        return S * S / (self.two_m * self.n_ticks)

    def _term(self, com):
        return 2 * com.I - self._expected(com.K, com.S, len(com.cov))

    def total(self) -> float:
        terms = math.fsum(self._term(c) for c in self.comms.values())
        return (terms - self.omega * self.eta) / self.two_m

    def breakdown(self) -> QualityBreakdown:
        observed = sum(2 * c.I for c in self.comms.values()) / self.two_m
        expected = math.fsum(self._expected(c.K, c.S, len(c.cov))
                             for c in self.comms.values()) / self.two_m
        return _breakdown(observed, expected, self.omega * self.eta / self.two_m,
                          len(self.comms), self.eta)

    def members(self, cid) -> set:
        return self.comms[cid].members

    def community_ids(self) -> list:
        return sorted(self.comms)

    def to_structure(self) -> DynamicCommunityStructure:
        return DynamicCommunityStructure.from_labels(self.stream, self.label)

    # -- move evaluation -----------------------------------------------------

    def prepare(self, X) -> _Prepared:
        """Precompute everything about moving ``X`` out of its community."""
        X = list(X)
        label, node, tick, prev, nxt, adj = \
            self.label, self.node, self.tick, self.prev, self.next, self.adj
        s = label[X[0]]
        Xs = set(X)
        within2 = 0
        cross = {}
        for i in X:
            for j in adj[i]:
                if j in Xs:
                    within2 += 1
                else:
                    lj = label[j]
                    cross[lj] = cross.get(lj, 0) + 1

        jm = self.jm
        rem, base_add, bgaps = {}, {}, {}
        base_ranges, rem_ticks = [], {}
        first, last = {}, {}
        d_eta = 0
        for i in X:
            u = node[i]
            t = tick[i]
            if u not in first or i < first[u]:
                first[u] = i
            if u not in last or i > last[u]:
                last[u] = i
            r = b = 1
            if jm:
                base_ranges.append((t, t))
                rem_ticks[t] = rem_ticks.get(t, 0) + 1
            p = prev[i]
            if p >= 0 and p not in Xs:
                gl = t - tick[p] - 1
                lp = label[p]
                bgaps.setdefault(lp, []).append((u, gl, tick[p] + 1, t - 1))
                if lp == s:
                    r += gl
                    d_eta += 1
                    if jm:
                        for x in range(tick[p] + 1, t):
                            rem_ticks[x] = rem_ticks.get(x, 0) + 1
            q = nxt[i]
            if q >= 0:
                gl = tick[q] - t - 1
                if q in Xs:
                    r += gl
                    b += gl
                    if jm and gl:
                        base_ranges.append((t + 1, tick[q] - 1))
                        for x in range(t + 1, tick[q]):
                            rem_ticks[x] = rem_ticks.get(x, 0) + 1
                else:
                    lq = label[q]
                    bgaps.setdefault(lq, []).append((u, gl, t + 1, tick[q] - 1))
                    if lq == s:
                        r += gl
                        d_eta += 1
                        if jm:
                            for x in range(t + 1, tick[q]):
                                rem_ticks[x] = rem_ticks.get(x, 0) + 1
            rem[u] = rem.get(u, 0) + r
            base_add[u] = base_add.get(u, 0) + b

        temporal = set()
        for u, i in first.items():
            if prev[i] >= 0:
                temporal.add(label[prev[i]])
        for u, i in last.items():
            if nxt[i] >= 0:
                temporal.add(label[nxt[i]])

        prep = _Prepared()
        prep.X, prep.source, prep.within = X, s, within2 // 2
        prep.cross, prep.rem, prep.base_add, prep.bgaps = cross, rem, base_add, bgaps
        prep.d_eta_source, prep.base_ranges, prep.rem_ticks = d_eta, base_ranges, rem_ticks
        prep.temporal = temporal
        prep._base_set = None

        com = self.comms[s]
        if len(com.members) == len(X):
            new_term = 0.0
        else:
            k, dur = self.k, com.dur
            S, K = com.S, com.K
            for u, r in rem.items():
                d_old = dur[u]
                d_new = d_old - r
                S += k[u] * (math.sqrt(d_new) - math.sqrt(d_old))
                if d_new == 0:
                    K -= k[u]
            tc = len(com.cov)
            if jm:
                cov = com.cov
                tc -= sum(1 for x, c in rem_ticks.items() if cov[x] == c)
            I = com.I - cross.get(s, 0) - prep.within
            new_term = 2 * I - self._expected(K, S, tc)
        prep.source_term = new_term - self._term(com)
        return prep

    def candidates(self, prep: _Prepared) -> list:
        """Communities adjacent to the prepared unit, topologically or in time."""
        out = set(prep.cross)
        out |= prep.temporal
        out.discard(prep.source)
        return sorted(out)

    def gain(self, prep: _Prepared, target) -> float:
        """Exact change of the total score if ``prep.X`` moves to ``target``."""
        self.evaluations += 1
        s = prep.source
        if target == s:
            raise SameCommunity(f"source and target are both {s}")
        gaps = prep.bgaps.get(target, ())
        if target == NEW or target not in self.comms:
            if target != NEW:
                raise KeyError(f"unknown community {target}")
            K0, S0, I0, term0, dur, cov = 0, 0.0, 0, 0.0, {}, {}
        else:
            com = self.comms[target]
            K0, S0, I0, dur, cov = com.K, com.S, com.I, com.dur, com.cov
            term0 = self._term(com)
        add = dict(prep.base_add)
        for u, gl, _, _ in gaps:
            add[u] += gl
        k = self.k
        S, K = S0, K0
        for u, a in add.items():
            d_old = dur.get(u, 0)
            S += k[u] * (math.sqrt(d_old + a) - math.sqrt(d_old))
            if d_old == 0:
                K += k[u]
        tc = len(cov)
        if self.jm:
            new_ticks = prep.base_ticks()
            if gaps:
                new_ticks = set(new_ticks)
                for _, gl, lo, hi in gaps:
                    new_ticks.update(range(lo, hi + 1))
            tc += sum(1 for x in new_ticks if x not in cov)
        I = I0 + prep.cross.get(target, 0) + prep.within
        target_term = 2 * I - self._expected(K, S, tc) - term0
        d_eta = prep.d_eta_source - len(gaps)
        return (prep.source_term + target_term - self.omega * d_eta) / self.two_m

    def move(self, prep: _Prepared, target) -> int:
        """Apply a prepared move; returns the (possibly new) target id."""
        s = prep.source
        src = self.comms[s]
        if target == NEW:
            target = self.next_id
            self.next_id += 1
        elif target == s:
            raise SameCommunity(f"source and target are both {s}")
        dst = self.comms.get(target)
        if dst is None:
            dst = self.comms[target] = _Com()
            self.next_id = max(self.next_id, target + 1)
        gaps = prep.bgaps.get(target, ())

        label = self.label
        for i in prep.X:
            label[i] = target
        src.members.difference_update(prep.X)
        dst.members.update(prep.X)

        for u, r in prep.rem.items():
            d = src.dur[u] - r
            if d:
                src.dur[u] = d
            else:
                del src.dur[u]
        add = dict(prep.base_add)
        for u, gl, _, _ in gaps:
            add[u] += gl
        for u, a in add.items():
            dst.dur[u] = dst.dur.get(u, 0) + a

        if self.jm:
            cov = src.cov
            for x, c in prep.rem_ticks.items():
                left = cov[x] - c
                if left:
                    cov[x] = left
                else:
                    del cov[x]
            cov = dst.cov
            for lo, hi in prep.base_ranges:
                for x in range(lo, hi + 1):
                    cov[x] = cov.get(x, 0) + 1
            for _, gl, lo, hi in gaps:
                for x in range(lo, hi + 1):
                    cov[x] = cov.get(x, 0) + 1

        src.I -= prep.cross.get(s, 0) + prep.within
        dst.I += prep.cross.get(target, 0) + prep.within
        self.eta += prep.d_eta_source - len(gaps)
        if src.members:
            self._refresh(src)
        else:
            del self.comms[s]
        self._refresh(dst)
        return target


def delta_move(stream: LinkStream, structure: DynamicCommunityStructure, moved, source,
               target, config: QualityConfig) -> float:
    """Score change from moving active time nodes ``moved`` from ``source`` to ``target``.

    ``structure`` must be canonical (see
    :meth:`DynamicCommunityStructure.is_canonical`); ``target`` may be
    :data:`~lago.community.NEW`.
    """
    moved = list(moved)
    if target == source:
        raise SameCommunity(f"source and target are both {source}")
    if not moved:
        return 0.0
    if not structure.is_canonical():
        raise InvalidStructure(["structure is not in canonical form"])
    labels = structure.labels()
    ids = [stream.atn_index(a) for a in moved]
    for atn, i in zip(moved, ids):
        if labels[i] != source:
            raise NotInSource(f"{tuple(atn)} is in community {labels[i]}, not {source}")
    if target != NEW and target not in structure.communities:
        raise KeyError(f"unknown community {target}")
    state = IncrementalQuality(stream, config, labels)
    return state.gain(state.prepare(ids), target)
