"""Link streams: parsing, tick normalization and the indices used everywhere else.

A link stream is a set of instantaneous, undirected, unweighted interactions
``(u, v, t)`` over a discrete horizon.  Timestamps are normalized to integer
ticks ``(t - origin) / tick_duration`` at construction time, so no floating
point time ever reaches the optimizer.
"""

from __future__ import annotations

import io
import math
import re
from collections import namedtuple
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence

from .exceptions import (
    EmptyInput,
    MalformedRow,
    NonUniformTimestamp,
    NotActive,
    SelfLoop,
    UnknownNode,
)

__all__ = [
    "ActiveTimeNode",
    "LinkStream",
    "infer_tick",
    "parse_edge_list",
    "read_edge_list",
    "stream_from_records",
    "write_edge_list",
]

ActiveTimeNode = namedtuple("ActiveTimeNode", ["node", "tick"])


def _node_key(label):
    # numeric ids sort numerically, everything else lexicographically after them
    try:
        return (0, int(label), "")
    except ValueError:
        return (1, 0, label)


def _gcd(a: Fraction, b: Fraction) -> Fraction:
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    return Fraction(math.gcd(int(a * den), int(b * den)), den)


def infer_tick(timestamps: Iterable) -> Fraction:
    """Return the natural tick of a collection of timestamps.

    The tick is the greatest common divisor of the gaps between successive
    distinct timestamps, which is the coarsest discretization that keeps every
    interaction at its exact time.  A single distinct instant gives 1.

    >>> infer_tick([0, 20, 60])
    Fraction(20, 1)
    >>> infer_tick([0, 3, 7])
    Fraction(1, 1)
    """
    values = sorted({Fraction(t) for t in timestamps})
    if not values:
        raise EmptyInput("cannot infer a tick from zero timestamps")
    gaps = [b - a for a, b in zip(values, values[1:])]
    if not gaps:
        return Fraction(1)
    return reduce(_gcd, gaps)


class LinkStream:
    """Immutable link stream ``(T, V, E)`` with integer ticks.

    Parameters
    ----------
    edges : iterable of (u, v, tick)
        Interactions.  Node labels are converted to ``str``; ticks must be
        integers.  ``(u, v, t)`` and ``(v, u, t)`` denote the same interaction
        and duplicates collapse.
    nodes : iterable of str, optional
        Declared node set.  Defaults to the edge endpoints.  Declared nodes
        without interactions are kept with degree 0.
    horizon : (int, int), optional
        Inclusive tick range.  Defaults to the observed ``[min t, max t]``.
    tick_duration : number, default=1
        Original time units per tick.
    origin : number, default=0
        Original timestamp of tick 0.

    Attributes
    ----------
    nodes : tuple of str
    m : int
        Number of interactions.
    degree : dict
        Interaction count per node.
    per_node_activity : dict
        Sorted active ticks per node.
    """

    def __init__(self, edges=(), *, nodes=None, horizon=None, tick_duration=1, origin=0):
        canonical = set()
        labels = set()
        for u, v, t in edges:
            u, v = str(u), str(v)
            if u == v:
                raise ValueError(f"self-loop on node {u!r} at tick {t}")
            if int(t) != t:
                raise ValueError(f"tick {t!r} is not an integer")
            if u > v:
                u, v = v, u
            canonical.add((u, v, int(t)))
            labels.add(u)
            labels.add(v)

        if nodes is not None:
            declared = {str(n) for n in nodes}
            missing = labels - declared
            if missing:
                raise UnknownNode(sorted(missing)[0])
            labels = declared
        self.nodes = tuple(sorted(labels, key=_node_key))
        self._index = {label: i for i, label in enumerate(self.nodes)}

        if horizon is None:
            if canonical:
                ticks = [t for _, _, t in canonical]
                horizon = (min(ticks), max(ticks))
            else:
                horizon = (0, 0)
        start, end = int(horizon[0]), int(horizon[1])
        if end < start:
            raise ValueError(f"empty horizon [{start}, {end}]")
        for _, _, t in canonical:
            if not start <= t <= end:
                raise ValueError(f"tick {t} outside horizon [{start}, {end}]")
        self.horizon = (start, end)
        self.tick_duration = Fraction(tick_duration)
        if self.tick_duration <= 0:
            raise ValueError("tick_duration must be positive")
        self.origin = Fraction(origin)

        idx = self._index
        self._edges = tuple(
            sorted((t, idx[u], idx[v]) if idx[u] < idx[v] else (t, idx[v], idx[u])
                   for u, v, t in canonical)
        )
        self.m = len(self._edges)
        self._build_indices()

    # -- indices -----------------------------------------------------------

    def _build_indices(self):
        n = len(self.nodes)
        deg = [0] * n
        activity = [set() for _ in range(n)]
        pair_ticks = {}
        for t, u, v in self._edges:
            deg[u] += 1
            deg[v] += 1
            activity[u].add(t)
            activity[v].add(t)
            pair_ticks.setdefault((u, v), []).append(t)
        self._deg = deg
        self._pair_ticks = {k: frozenset(ts) for k, ts in pair_ticks.items()}

        # active time nodes, ordered by (node, tick): a node's activity is contiguous
        atn_node, atn_tick, offsets = [], [], [0]
        for u in range(n):
            ticks = sorted(activity[u])
            atn_node.extend([u] * len(ticks))
            atn_tick.extend(ticks)
            offsets.append(len(atn_tick))
        self._atn_node = atn_node
        self._atn_tick = atn_tick
        self._node_offsets = offsets
        self._atn_id = {(u, t): i for i, (u, t) in enumerate(zip(atn_node, atn_tick))}

        adj = [[] for _ in atn_node]
        atn_edges = []
        for t, u, v in self._edges:
            a, b = self._atn_id[(u, t)], self._atn_id[(v, t)]
            adj[a].append(b)
            adj[b].append(a)
            atn_edges.append((a, b))
        self._atn_adj = [tuple(x) for x in adj]
        self._atn_edges = atn_edges

        self.degree = {self.nodes[u]: deg[u] for u in range(n)}
        self.per_node_activity = {
            self.nodes[u]: tuple(atn_tick[offsets[u]:offsets[u + 1]]) for u in range(n)
        }

    # -- basic quantities --------------------------------------------------

    @property
    def total_interactions(self) -> int:
        return self.m

    @property
    def n_ticks(self) -> int:
        """Horizon length ``|T|`` in ticks."""
        return self.horizon[1] - self.horizon[0] + 1

    @property
    def n_active(self) -> int:
        return len(self._atn_node)

    @property
    def active(self) -> frozenset:
        return frozenset(self.active_nodes)

    @property
    def active_nodes(self) -> list:
        """Active time nodes in canonical (node, tick) order."""
        labels = self.nodes
        return [ActiveTimeNode(labels[u], t) for u, t in zip(self._atn_node, self._atn_tick)]

    def atn_index(self, atn) -> int:
        """Position of an active time node in :attr:`active_nodes`."""
        node, tick = atn
        try:
            return self._atn_id[(self._index[str(node)], int(tick))]
        except KeyError:
            if str(node) not in self._index:
                raise UnknownNode(node) from None
            raise NotActive(ActiveTimeNode(str(node), tick)) from None

    def node_index(self, node) -> int:
        try:
            return self._index[str(node)]
        except KeyError:
            raise UnknownNode(node) from None

    def is_active(self, node, tick) -> bool:
        return (self._index.get(str(node)), tick) in self._atn_id

    def edges(self) -> Iterator[tuple]:
        """Iterate interactions as ``(u, v, tick)`` label triples, sorted by tick."""
        labels = self.nodes
        for t, u, v in self._edges:
            yield labels[u], labels[v], t

    def timestamp(self, tick) -> Fraction:
        return self.origin + tick * self.tick_duration

    # -- queries -----------------------------------------------------------

    def interactions_between(self, u, v, ticks) -> int:
        """Number of ticks in ``ticks`` at which ``u`` and ``v`` interact."""
        a, b = self.node_index(u), self.node_index(v)
        if a > b:
            a, b = b, a
        present = self._pair_ticks.get((a, b))
        if not present:
            return 0
        return sum(1 for t in set(ticks) if t in present)

    def temporal_neighbors(self, atn):
        """Same node's nearest active time nodes strictly before and after ``atn``.

        Returns a ``(previous, next)`` pair; either side is None at the node's
        first or last activity.
        """
        i = self.atn_index(atn)
        u = self._atn_node[i]
        label = self.nodes[u]
        prev = nxt = None
        if i > self._node_offsets[u]:
            prev = ActiveTimeNode(label, self._atn_tick[i - 1])
        if i + 1 < self._node_offsets[u + 1]:
            nxt = ActiveTimeNode(label, self._atn_tick[i + 1])
        return prev, nxt

    def topological_neighbors(self, atn) -> set:
        i = self.atn_index(atn)
        labels = self.nodes
        return {ActiveTimeNode(labels[self._atn_node[j]], self._atn_tick[j])
                for j in self._atn_adj[i]}

    def __repr__(self):
        return (f"LinkStream(n_nodes={len(self.nodes)}, m={self.m}, "
                f"horizon={self.horizon}, n_active={self.n_active})")

    def __eq__(self, other):
        if not isinstance(other, LinkStream):
            return NotImplemented
        return (self.nodes == other.nodes and self.horizon == other.horizon
                and self._edges == other._edges
                and self.tick_duration == other.tick_duration
                and self.origin == other.origin)

    __hash__ = None


# -- text format --------------------------------------------------------------

_DIRECTIVE = re.compile(r"\b(origin|tick_duration|horizon)=(\S+)")


def _read_directives(lines):
    found = {}
    for line in lines:
        found.update(_DIRECTIVE.findall(line))
    return found


def parse_edge_list(
    records: Iterable[str],
    *,
    delimiter: str | None = None,
    columns: Sequence[int] = (0, 1, 2),
    tick_duration="auto",
    origin=None,
    horizon=None,
    header: bool = False,
) -> LinkStream:
    """Parse rows ``t u v [ignored ...]`` into a :class:`LinkStream`.

    ``columns`` gives the positions of (t, u, v) in a row.  Without an explicit
    ``delimiter`` a row is split on commas when it has any, else on whitespace.  Blank lines and
    lines starting with ``#`` are skipped; a comment of the form
    ``# origin=0 tick_duration=1 horizon=0:99`` supplies defaults for the
    corresponding keyword arguments (explicit arguments win).

    Ticks are ``(t - origin) / tick_duration`` where ``origin`` defaults to the
    smallest timestamp and ``tick_duration="auto"`` infers the tick with
    :func:`infer_tick`.
    """
    rows = []
    comments = []
    ti, ui, vi = columns
    need = max(columns) + 1
    skip_first = header
    for lineno, raw in enumerate(records, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        if skip_first:
            skip_first = False
            continue
        if delimiter:
            fields = line.split(delimiter)
        else:
            fields = line.split(",") if "," in line else line.split()
        fields = [f.strip() for f in fields]
        if len(fields) < need:
            raise MalformedRow(lineno, f"expected at least {need} columns, got {len(fields)}")
        try:
            t = Fraction(fields[ti])
        except (ValueError, ZeroDivisionError):
            raise MalformedRow(lineno, f"non-numeric timestamp {fields[ti]!r}") from None
        u, v = fields[ui], fields[vi]
        if not u or not v:
            raise MalformedRow(lineno, "empty node identifier")
        if u == v:
            raise SelfLoop(lineno)
        rows.append((lineno, t, u, v))
    if not rows:
        raise EmptyInput("no interactions in input")

    directives = _read_directives(comments)
    if tick_duration == "auto" and "tick_duration" in directives:
        tick_duration = directives["tick_duration"]
    if origin is None and "origin" in directives:
        origin = directives["origin"]
    if horizon is None and "horizon" in directives:
        lo, _, hi = directives["horizon"].partition(":")
        horizon = (int(lo), int(hi))

    return _normalize(rows, tick_duration, origin, horizon)


def _normalize(rows, tick_duration, origin, horizon):
    """``rows`` are ``(line, timestamp, u, v)`` with Fraction timestamps."""
    if origin is None:
        origin = min(t for _, t, _, _ in rows)
    origin = Fraction(origin)
    if tick_duration == "auto" or tick_duration is None:
        d = infer_tick([origin] + [t for _, t, _, _ in rows])
    else:
        d = Fraction(tick_duration)
        if d <= 0:
            raise ValueError("tick_duration must be positive")

    edges = []
    for lineno, t, u, v in rows:
        q = (t - origin) / d
        if q.denominator != 1:
            raise NonUniformTimestamp(lineno, t, d)
        edges.append((u, v, int(q)))
    return LinkStream(edges, horizon=horizon, tick_duration=d, origin=origin)


def stream_from_records(records, *, tick_duration="auto", origin=None, horizon=None) -> LinkStream:
    """Build a stream from in-memory ``(t, u, v)`` records in original time units.

    Timestamps are normalized exactly as by :func:`parse_edge_list`; the
    ``line`` reported by errors is the 1-based record position.
    """
    rows = []
    for pos, rec in enumerate(records, start=1):
        if len(rec) < 3:
            raise MalformedRow(pos, f"expected (t, u, v), got {tuple(rec)!r}")
        t, u, v = rec[0], str(rec[1]), str(rec[2])
        try:
            t = Fraction(str(t)) if isinstance(t, (str, float)) else Fraction(t)
        except (ValueError, TypeError, ZeroDivisionError):
            raise MalformedRow(pos, f"non-numeric timestamp {rec[0]!r}") from None
        if u == v:
            raise SelfLoop(pos)
        rows.append((pos, t, u, v))
    if not rows:
        raise EmptyInput("no interactions in input")
    return _normalize(rows, tick_duration, origin, horizon)


def read_edge_list(path, **kwargs) -> LinkStream:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, **kwargs)


def _fmt(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return repr(float(x))


def write_edge_list(stream: LinkStream, fh=None, delimiter: str = " ") -> str | None:
    """Write ``stream`` in the ``t u v`` row format, timestamps in original units.

    A directive comment records origin, tick duration and horizon so that
    reading the file back yields an identical stream.  Returns the text when
    ``fh`` is None.
    """
    out = io.StringIO() if fh is None else fh
    lo, hi = stream.horizon
    out.write(f"# origin={_fmt(stream.origin)} tick_duration={_fmt(stream.tick_duration)} "
              f"horizon={lo}:{hi}\n")
    for u, v, t in stream.edges():
        out.write(f"{_fmt(stream.timestamp(t))}{delimiter}{u}{delimiter}{v}\n")
    if fh is None:
        return out.getvalue()
    return None
