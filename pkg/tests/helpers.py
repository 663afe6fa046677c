"""Test-side oracle and random instance builders.

``oracle_q`` recomputes the quality function from the raw edge list and the
community intervals, sharing no code with the package.
"""

from __future__ import annotations

import math
import random
from collections import Counter

from lago import Community, DynamicCommunityStructure, LinkStream


def oracle_q(edges, horizon, communities, expectation, omega):
    """``communities``: {cid: {node: [(a, b), ...]}}; returns (observed, expected, penalty)."""
    edge_set = set()
    for u, v, t in edges:
        edge_set.add((min(u, v), max(u, v), t))
    m = len(edge_set)
    deg = Counter()
    for u, v, _ in edge_set:
        deg[u] += 1
        deg[v] += 1
    nodes = sorted(deg)
    n_ticks = horizon[1] - horizon[0] + 1
    observed = expected = 0.0
    for members in communities.values():
        ticks = {u: set() for u in nodes}
        for u, ivs in members.items():
            for a, b in ivs:
                ticks.setdefault(u, set()).update(range(a, b + 1))
        span = set().union(*ticks.values()) if ticks else set()
        for u in nodes:
            for v in nodes:
                if u != v:
                    both = ticks[u] & ticks[v]
                    observed += sum(1 for t in both if (min(u, v), max(u, v), t) in edge_set)
                du, dv = len(ticks[u]), len(ticks[v])
                if expectation == "JM":
                    e = len(span) if du and dv else 0
                else:
                    e = math.sqrt(du * dv)
                expected += deg[u] * deg[v] / (2 * m) * e / n_ticks
    switches = 0
    for u in nodes:
        seq = sorted((a, cid) for cid, members in communities.items()
                     for a, _ in members.get(u, ()))
        switches += sum(1 for (_, x), (_, y) in zip(seq, seq[1:]) if x != y)
    return observed / (2 * m), expected / (2 * m), omega * switches / (2 * m)


def structure_intervals(structure):
    return {cid: {u: list(ivs) for u, ivs in com.members.items()}
            for cid, com in structure.communities.items()}


def random_stream(rng: random.Random, max_nodes=6, max_ticks=10, density=0.3, pad=0):
    """Random stream with at least one interaction; ``pad`` widens the horizon."""
    while True:
        n = rng.randint(2, max_nodes)
        T = rng.randint(1, max_ticks)
        edges = [(f"v{u}", f"v{w}", t) for t in range(T)
                 for u in range(n) for w in range(u + 1, n) if rng.random() < density]
        if edges:
            lo = min(t for *_, t in edges) - rng.randint(0, pad)
            hi = max(t for *_, t in edges) + rng.randint(0, pad)
            return LinkStream(edges, horizon=(lo, hi)), edges


def random_labels(rng: random.Random, n_active, max_labels=None):
    k = max_labels or rng.randint(1, max(1, n_active))
    return [rng.randrange(k) for _ in range(n_active)]


def extend_runs(rng: random.Random, structure):
    """Widen canonical runs into neighbouring silent ticks (same assignment, same switches).

    A run may grow over a silent tick only when the node has no run there and
    the growth does not reach a tick of the node's next or previous run.
    """
    stream = structure.stream
    lo_h, hi_h = stream.horizon
    out = {}
    by_node = {}
    for cid, com in structure.communities.items():
        for u, ivs in com.members.items():
            for iv in ivs:
                by_node.setdefault(u, []).append([iv[0], iv[1], cid])
    for u, runs in by_node.items():
        runs.sort()
        for i, run in enumerate(runs):
            left_wall = runs[i - 1][1] + 1 if i > 0 else lo_h
            right_wall = runs[i + 1][0] - 1 if i + 1 < len(runs) else hi_h
            run[0] = rng.randint(left_wall, run[0])
            run[1] = rng.randint(run[1], right_wall)
        for a, b, cid in runs:
            out.setdefault(cid, {}).setdefault(u, []).append((a, b))
    return out


def from_intervals(stream, intervals):
    return DynamicCommunityStructure(stream, [Community(c, m) for c, m in intervals.items()])


def set_partitions(n):
    """All set partitions of ``range(n)`` as restricted growth strings."""
    def rec(i, cur, top):
        if i == n:
            yield list(cur)
            return
        for c in range(top + 1):
            cur.append(c)
            yield from rec(i + 1, cur, max(top, c + 1))
            cur.pop()
    yield from rec(0, [], 0)
