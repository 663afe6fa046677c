"""Comparing community structures and ranking optimizer variants."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import MissingVariantResult, UniverseMismatch

__all__ = ["RankTable", "nvi", "variation_of_information", "rank_variants"]


def _partition_labels(structure, stream):
    if stream is not None and structure.stream is not stream and structure.stream != stream:
        raise UniverseMismatch("structure was built on a different link stream")
    labels = structure.labels()
    if any(x is None for x in labels):
        raise UniverseMismatch("structure leaves active time nodes unassigned")
    return labels


def variation_of_information(a_labels, b_labels) -> float:
    """VI between two labelings of the same elements, in nats."""
    if len(a_labels) != len(b_labels):
        raise UniverseMismatch("labelings cover different numbers of elements")
    n = len(a_labels)
    if n == 0:
        return 0.0
    joint = Counter(zip(a_labels, b_labels))
    pa = Counter(a_labels)
    pb = Counter(b_labels)
    vi = 0.0
    for (x, y), nxy in joint.items():
        # -p(x,y) [log p(x,y)/p(x) + log p(x,y)/p(y)]
        vi -= nxy / n * (math.log(nxy / pa[x]) + math.log(nxy / pb[y]))
    return max(vi, 0.0)


def nvi(a, b, stream=None) -> float:
    """Variation of information over active time nodes, divided by ``ln |A|``."""
    stream = stream if stream is not None else a.stream
    la = _partition_labels(a, stream)
    lb = _partition_labels(b, stream)
    n = len(la)
    if n <= 1:
        return 0.0
    return min(variation_of_information(la, lb) / math.log(n), 1.0)


@dataclass
class RankTable:
    """Per (instance, variant) medians and their within-instance ranks."""

    rows: list
    variants: list

    def summary(self) -> dict:
        """Mean, quartiles and deciles of both ranks for each variant."""
        out = {}
        for v in self.variants:
            mine = [r for r in self.rows if r["variant"] == v]
            entry = {}
            for key in ("rank_time", "rank_q"):
                vals = np.array([r[key] for r in mine], dtype=float)
                q = np.quantile(vals, [0.1, 0.25, 0.5, 0.75, 0.9])
                entry[key] = {
                    "mean": float(vals.mean()),
                    "d1": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
                    "q3": float(q[3]), "d9": float(q[4]),
                }
            out[v] = entry
        return out


def rank_variants(rows) -> RankTable:
    """Rank variants within each instance on runtime (ascending) and Q (descending).

    ``rows`` are mappings with keys ``instance``, ``variant``, ``runtime_ms``
    and ``q_value`` (plus an optional ``seed``); repeated runs of one
    (instance, variant) are reduced to their medians first.  Ties share the
    average rank.
    """
    groups = {}
    seeds = {}
    for r in rows:
        key = (r["instance"], r["variant"])
        groups.setdefault(key, []).append((float(r["runtime_ms"]), float(r["q_value"])))
        if "seed" in r:
            seeds.setdefault(key, r["seed"])
    instances = sorted({k[0] for k in groups})
    variants = sorted({k[1] for k in groups})
    table = []
    for inst in instances:
        missing = [v for v in variants if (inst, v) not in groups]
        if missing:
            raise MissingVariantResult(f"instance {inst} lacks results for {missing}")
        meds = []
        for v in variants:
            vals = np.array(groups[(inst, v)])
            meds.append((v, float(np.median(vals[:, 0])), float(np.median(vals[:, 1]))))
        rt = rankdata([m[1] for m in meds], method="average")
        rq = rankdata([-m[2] for m in meds], method="average")
        for (v, t, q), a, b in zip(meds, rt, rq):
            table.append({
                "instance": inst, "variant": v, "seed": seeds.get((inst, v), ""),
                "runtime_ms": t, "q_value": q,
                "rank_time": float(a), "rank_q": float(b),
            })
    return RankTable(rows=table, variants=variants)
