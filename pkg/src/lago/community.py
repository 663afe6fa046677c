"""Dynamic community structures over the active time nodes of a link stream.

A community maps each member node to one or more closed tick intervals.
Structures built by the optimizer are *canonical*: a node's consecutive active
ticks with the same label form one run spanning the silent ticks between
them, and every run starts and ends on an active tick.  Structures read from
disk may be arbitrary (e.g. untrimmed) and are scored as given.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .exceptions import InvalidStructure, NotActive, UnknownNode
from .linkstream import ActiveTimeNode, LinkStream

__all__ = [
    "NEW",
    "Community",
    "DynamicCommunityStructure",
    "Violation",
    "apply_move",
    "csc",
    "singleton_structure",
    "trim",
    "validate",
]

#: Move target meaning "a fresh community".
NEW = "NEW"


class Community:
    """One dynamic community: node -> sorted tuple of closed tick intervals."""

    def __init__(self, id, members: Mapping[str, Iterable]):
        self.id = int(id)
        self.members = {
            str(node): tuple(sorted((int(a), int(b)) for a, b in intervals))
            for node, intervals in members.items()
        }

    @property
    def nodes(self):
        return tuple(self.members)

    def duration(self, node) -> int:
        """``|T_{u in C}|``: ticks during which ``node`` belongs to the community."""
        return sum(b - a + 1 for a, b in self.members.get(str(node), ()))

    def ticks(self, node) -> set:
        return {t for a, b in self.members.get(str(node), ()) for t in range(a, b + 1)}

    @cached_property
    def existence_duration(self) -> int:
        """``|T_C|``: length of the union of all member intervals."""
        spans = sorted(iv for ivs in self.members.values() for iv in ivs)
        total, cur_a, cur_b = 0, None, None
        for a, b in spans:
            if cur_b is None or a > cur_b + 1:
                if cur_b is not None:
                    total += cur_b - cur_a + 1
                cur_a, cur_b = a, b
            else:
                cur_b = max(cur_b, b)
        if cur_b is not None:
            total += cur_b - cur_a + 1
        return total

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "members": [
                {"node": node, "intervals": [list(iv) for iv in ivs]}
                for node, ivs in self.members.items()
            ],
        }

    def __eq__(self, other):
        if not isinstance(other, Community):
            return NotImplemented
        return self.id == other.id and self.members == other.members

    __hash__ = None

    def __repr__(self):
        return f"Community(id={self.id}, nodes={len(self.members)})"


@dataclass(frozen=True)
class Violation:
    kind: str
    community: int | None = None
    node: str | None = None
    tick: int | None = None
    detail: str = ""

    def __str__(self):
        where = ", ".join(
            f"{k}={v}" for k, v in
            (("community", self.community), ("node", self.node), ("tick", self.tick))
            if v is not None
        )
        text = f"{self.kind}({where})"
        return f"{text}: {self.detail}" if self.detail else text


class DynamicCommunityStructure:
    """Mutually exclusive communities of node-time pairs over ``stream``.

    Parameters
    ----------
    stream : LinkStream
    communities : iterable of Community, or mapping id -> Community
    """

    def __init__(self, stream: LinkStream, communities):
        self.stream = stream
        if isinstance(communities, Mapping):
            communities = communities.values()
        self.communities = {c.id: c for c in communities}

    # -- construction ------------------------------------------------------

    @classmethod
    def from_labels(cls, stream: LinkStream, labels) -> "DynamicCommunityStructure":
        """Canonical structure from one label per active time node.

        ``labels`` is aligned with ``stream.active_nodes``.  Consecutive active
        ticks of a node sharing a label form a single run.
        """
        labels = [int(x) for x in labels]
        if len(labels) != stream.n_active:
            raise ValueError(f"expected {stream.n_active} labels, got {len(labels)}")
        members: dict[int, dict[str, list]] = {}
        ticks = stream._atn_tick
        offsets = stream._node_offsets
        for u, label in enumerate(stream.nodes):
            lo, hi = offsets[u], offsets[u + 1]
            i = lo
            while i < hi:
                j = i
                while j + 1 < hi and labels[j + 1] == labels[i]:
                    j += 1
                members.setdefault(labels[i], {}).setdefault(label, []).append(
                    (ticks[i], ticks[j]))
                i = j + 1
        return cls(stream, [Community(cid, mem) for cid, mem in sorted(members.items())])

    # -- derived views -----------------------------------------------------

    @cached_property
    def _cover(self):
        """Per active time node: list of community ids whose runs cover it."""
        stream = self.stream
        cover = [[] for _ in range(stream.n_active)]
        ticks = stream._atn_tick
        offsets = stream._node_offsets
        index = stream._index
        for cid, com in self.communities.items():
            for node, ivs in com.members.items():
                u = index.get(node)
                if u is None:
                    continue
                lo, hi = offsets[u], offsets[u + 1]
                for a, b in ivs:
                    for i in range(bisect_left(ticks, a, lo, hi), bisect_right(ticks, b, lo, hi)):
                        cover[i].append(cid)
        return cover

    def labels(self) -> list:
        """Community id per active time node (aligned with ``stream.active_nodes``).

        Unassigned active time nodes get None.
        """
        return [c[0] if c else None for c in self._cover]

    @property
    def assignment(self) -> dict:
        return {atn: cid for atn, cid in zip(self.stream.active_nodes, self.labels())}

    def community_of(self, atn):
        i = self.stream.atn_index(atn)
        cover = self._cover[i]
        return cover[0] if cover else None

    def run_sequence(self, node) -> list:
        """Time-ordered ``(community id, (first, last))`` runs of ``node``.

        Consecutive runs in the same community are merged into one entry
        spanning both.
        """
        node = str(node)
        if node not in self.stream._index:
            raise UnknownNode(node)
        runs = sorted(
            (iv, cid)
            for cid, com in self.communities.items()
            for iv in com.members.get(node, ())
        )
        merged = []
        for (a, b), cid in runs:
            if merged and merged[-1][0] == cid:
                merged[-1] = (cid, (merged[-1][1][0], max(b, merged[-1][1][1])))
            else:
                merged.append((cid, (a, b)))
        return merged

    def csc(self, node) -> int:
        return csc(self, node)

    def sum_csc(self) -> int:
        return sum(csc(self, u) for u in self.stream.nodes)

    @property
    def num_communities(self) -> int:
        return len(self.communities)

    def is_canonical(self) -> bool:
        """True when the structure equals the canonical form of its own labels."""
        labels = self.labels()
        if any(x is None for x in labels) or validate(self):
            return False
        return self == DynamicCommunityStructure.from_labels(self.stream, labels)

    # -- serialization -----------------------------------------------------

    def to_dict(self, expectation="MM", omega=1.0) -> dict:
        d = self.stream.tick_duration
        return {
            "expectation": expectation,
            "omega": omega,
            "tick_duration": d.numerator if d.denominator == 1 else float(d),
            "communities": [self.communities[k].to_dict() for k in sorted(self.communities)],
        }

    def to_json(self, expectation="MM", omega=1.0, **kwargs) -> str:
        return json.dumps(self.to_dict(expectation, omega), **kwargs)

    @classmethod
    def from_dict(cls, stream: LinkStream, data: Mapping) -> "DynamicCommunityStructure":
        communities = []
        for entry in data["communities"]:
            members = {}
            for m in entry["members"]:
                members.setdefault(str(m["node"]), []).extend(
                    (int(a), int(b)) for a, b in m["intervals"])
            communities.append(Community(entry["id"], members))
        return cls(stream, communities)

    @classmethod
    def from_json(cls, stream: LinkStream, text: str) -> "DynamicCommunityStructure":
        return cls.from_dict(stream, json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, DynamicCommunityStructure):
            return NotImplemented
        return self.stream == other.stream and self.communities == other.communities

    __hash__ = None

    def __repr__(self):
        return f"DynamicCommunityStructure(num_communities={len(self.communities)})"


def singleton_structure(stream: LinkStream) -> DynamicCommunityStructure:
    """Every active time node in its own community."""
    return DynamicCommunityStructure.from_labels(stream, range(stream.n_active))


def csc(structure: DynamicCommunityStructure, u) -> int:
    """Community switch count of node ``u``: merged runs minus one (0 if none)."""
    runs = structure.run_sequence(u)
    return max(len(runs) - 1, 0)


def trim(structure: DynamicCommunityStructure) -> DynamicCommunityStructure:
    """Shrink every run to its first and last active tick; drop inactive runs.

    Assignment of active time nodes is unchanged.  Communities left without
    any run disappear.
    """
    stream = structure.stream
    activity = stream.per_node_activity
    out = []
    for cid in sorted(structure.communities):
        com = structure.communities[cid]
        members = {}
        for node, ivs in com.members.items():
            ticks = activity.get(node, ())
            kept = []
            for a, b in ivs:
                lo, hi = bisect_left(ticks, a), bisect_right(ticks, b)
                if lo < hi:
                    kept.append((ticks[lo], ticks[hi - 1]))
            if kept:
                members[node] = kept
        if members:
            out.append(Community(cid, members))
    return DynamicCommunityStructure(stream, out)


def validate(structure: DynamicCommunityStructure) -> list:
    """List every violated structural invariant (empty list when valid)."""
    stream = structure.stream
    lo_h, hi_h = stream.horizon
    problems = []
    per_node = {}
    for cid, com in structure.communities.items():
        if not com.members:
            problems.append(Violation("NonEmpty", cid, detail="community has no members"))
        for node, ivs in com.members.items():
            if node not in stream._index:
                problems.append(Violation("UnknownNode", cid, node))
                continue
            if not ivs:
                problems.append(Violation("NonEmpty", cid, node, detail="member without intervals"))
            for a, b in ivs:
                if a > b:
                    problems.append(Violation("MalformedInterval", cid, node, a,
                                              f"interval [{a}, {b}] is reversed"))
                    continue
                if a < lo_h or b > hi_h:
                    problems.append(Violation("OutsideHorizon", cid, node, a if a < lo_h else b,
                                              f"interval [{a}, {b}] exceeds horizon"))
                per_node.setdefault(node, []).append((a, b, cid))
    for node, spans in per_node.items():
        spans.sort()
        for (a1, b1, c1), (a2, b2, c2) in zip(spans, spans[1:]):
            if a2 <= b1:
                problems.append(Violation(
                    "MutualExclusivity", c2, node, a2,
                    f"overlaps community {c1} interval [{a1}, {b1}]"))
    for atn, cover in zip(stream.active_nodes, structure._cover):
        if not cover:
            problems.append(Violation("Unassigned", None, atn.node, atn.tick,
                                      "active time node has no community"))
    return problems


def check_valid(structure: DynamicCommunityStructure) -> None:
    problems = validate(structure)
    if problems:
        raise InvalidStructure(problems)


def apply_move(structure: DynamicCommunityStructure, moved, target) -> DynamicCommunityStructure:
    """Canonical structure after relabelling ``moved`` time nodes to ``target``.

    ``target`` may be :data:`NEW`, which allocates ``max(id) + 1``.
    """
    stream = structure.stream
    labels = structure.labels()
    if target == NEW:
        target = max(structure.communities, default=-1) + 1
    for atn in moved:
        i = stream.atn_index(atn)
        if labels[i] is None:
            raise NotActive(ActiveTimeNode(*atn))
        labels[i] = target
    return DynamicCommunityStructure.from_labels(stream, labels)
