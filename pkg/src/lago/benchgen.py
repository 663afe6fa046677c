"""Synthetic link streams with planted dynamic communities.

A scenario is a list of blocks ``(label, nodes, [start, end])``.  At every
tick, each pair of nodes sharing a block interacts with probability
``alpha * base_intensity`` and each pair covered by two different blocks with
probability ``beta * base_intensity``.  Blocks sharing a label form one
community.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .community import DynamicCommunityStructure
from .exceptions import InvalidSpec, UnknownPreset
from .linkstream import LinkStream

__all__ = ["Block", "ScenarioSpec", "generate", "preset_scenarios", "PRESETS"]

PRESETS = ("fig-custom", "random")


@dataclass(frozen=True)
class Block:
    label: int
    nodes: tuple
    start: int
    end: int


@dataclass(frozen=True)
class ScenarioSpec:
    blocks: tuple
    alpha: float = 0.8
    beta: float = 0.0
    base_intensity: float = 0.1
    seed: int = 0
    horizon: tuple | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def span(self):
        if self.horizon is not None:
            return tuple(self.horizon)
        return (min(b.start for b in self.blocks), max(b.end for b in self.blocks))

    def check(self):
        if not self.blocks:
            raise InvalidSpec("scenario has no blocks")
        if not 0 < self.alpha <= 1:
            raise InvalidSpec(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.beta < self.alpha / 3:
            raise InvalidSpec(f"beta must lie in [0, alpha/3), got {self.beta}")
        if not 0 < self.base_intensity <= 1:
            raise InvalidSpec(f"base_intensity must lie in (0, 1], got {self.base_intensity}")
        lo, hi = self.span()
        claimed = {}
        for b in self.blocks:
            if b.start > b.end or not b.nodes:
                raise InvalidSpec(f"block {b.label} is empty")
            if b.start < lo or b.end > hi:
                raise InvalidSpec(f"block {b.label} exceeds the horizon")
            for u in b.nodes:
                for (s, e, other) in claimed.get(u, ()):
                    if b.start <= e and s <= b.end:
                        raise InvalidSpec(
                            f"node {u} is in blocks {other} and {b.label} at the same time")
                claimed.setdefault(u, []).append((b.start, b.end, b.label))


def generate(spec: ScenarioSpec):
    """Draw a link stream and its ground truth structure from ``spec``.

    Returns ``(stream, truth)``; the truth is canonical and restricted to the
    generated active time nodes.
    """
    spec.check()
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.span()
    p_in = spec.alpha * spec.base_intensity
    p_out = spec.beta * spec.base_intensity
    labels_of = {b.label for b in spec.blocks}
    order = {lab: i for i, lab in enumerate(sorted(labels_of, key=str))}

    edges = []
    owner = {}
    for t in range(lo, hi + 1):
        nodes, comm = [], []
        for b in spec.blocks:
            if b.start <= t <= b.end:
                nodes.extend(b.nodes)
                comm.extend([order[b.label]] * len(b.nodes))
        n = len(nodes)
        if n < 2:
            continue
        comm = np.asarray(comm)
        iu, iv = np.triu_indices(n, k=1)
        same = comm[iu] == comm[iv]
        draws = rng.random(iu.size)
        hit = np.where(same, draws < p_in, draws < p_out)
        for a, b in zip(iu[hit].tolist(), iv[hit].tolist()):
            edges.append((nodes[a], nodes[b], t))
            owner[(nodes[a], t)] = comm[a]
            owner[(nodes[b], t)] = comm[b]

    all_nodes = sorted({u for b in spec.blocks for u in b.nodes})
    stream = LinkStream(edges, nodes=all_nodes, horizon=(lo, hi))
    truth_labels = [int(owner[atn]) for atn in stream.active_nodes]
    truth = DynamicCommunityStructure.from_labels(stream, truth_labels) if edges else \
        DynamicCommunityStructure(stream, [])
    return stream, truth


def _scaled(fraction, total):
    return int(round(fraction * total))


def _fig_custom_blocks(num_nodes, num_ticks):
    """Three communities; the middle one splits, then one half merges with the third."""
    nodes = [f"n{i}" for i in range(num_nodes)]
    a, b, c = _scaled(1 / 3, num_nodes), _scaled(1 / 2, num_nodes), _scaled(2 / 3, num_nodes)
    t1, t2 = _scaled(1 / 3, num_ticks), _scaled(2 / 3, num_ticks)
    last = num_ticks - 1
    group_a, group_b1, group_b2, group_c = nodes[:a], nodes[a:b], nodes[b:c], nodes[c:]
    return (
        Block(0, tuple(group_a), 0, last),                         # stable
        Block(1, tuple(group_b1 + group_b2), 0, t1 - 1),           # splits at t1
        Block(2, tuple(group_c), 0, t2 - 1),                       # merges at t2
        Block(3, tuple(group_b1), t1, last),
        Block(4, tuple(group_b2), t1, t2 - 1),
        Block(5, tuple(group_b2 + group_c), t2, last),
    )


def _random_blocks(rng, num_nodes, num_ticks):
    nodes = [f"n{i}" for i in range(num_nodes)]
    n_phases = int(rng.integers(1, 5))
    min_len = max(1, num_ticks // (2 * n_phases))
    cuts = [0]
    for _ in range(n_phases - 1):
        room = num_ticks - cuts[-1] - min_len * (n_phases - len(cuts))
        if room <= min_len:
            break
        cuts.append(cuts[-1] + int(rng.integers(min_len, room)))
    cuts.append(num_ticks)
    blocks = []
    label = 0
    max_groups = max(2, num_nodes // 10)
    for start, stop in zip(cuts, cuts[1:]):
        k = int(rng.integers(2, max_groups + 1))
        weights = rng.dirichlet(np.full(k, 2.0))
        sizes = np.maximum(3, np.floor(weights * num_nodes)).astype(int)
        while sizes.sum() > num_nodes:
            sizes[np.argmax(sizes)] -= 1
        sizes[np.argmax(sizes)] += num_nodes - sizes.sum()
        perm = rng.permutation(num_nodes)
        pos = 0
        for size in sizes.tolist():
            members = tuple(nodes[i] for i in sorted(perm[pos:pos + size].tolist()))
            pos += size
            if members:
                blocks.append(Block(label, members, start, stop - 1))
                label += 1
    return tuple(blocks)


def preset_scenarios(name: str, num_nodes: int | None = None, num_ticks: int | None = None, *,
                     seed: int = 0, alpha: float | None = None, beta: float | None = None,
                     base_intensity: float = 0.1, node_range=(25, 250),
                     tick_range=(50, 250)) -> ScenarioSpec:
    """Named scenario families.

    ``fig-custom`` is a fixed multi-phase structure (stable, split, merge)
    scaled to ``num_nodes`` x ``num_ticks`` (defaults 30 x 100, alpha 0.8,
    beta 0).  ``random`` samples the size from ``node_range`` / ``tick_range``,
    alpha uniform in [0.5, 1] and beta uniform in [0, alpha / 3), and draws a
    random sequence of node partitions over time.
    """
    rng = np.random.default_rng(seed)
    if name == "fig-custom":
        num_nodes = 30 if num_nodes is None else int(num_nodes)
        num_ticks = 100 if num_ticks is None else int(num_ticks)
        if num_nodes < 6 or num_ticks < 3:
            raise InvalidSpec("fig-custom needs at least 6 nodes and 3 ticks")
        blocks = _fig_custom_blocks(num_nodes, num_ticks)
        alpha = 0.8 if alpha is None else alpha
        beta = 0.0 if beta is None else beta
    elif name == "random":
        if num_nodes is None:
            num_nodes = int(rng.integers(node_range[0], node_range[1] + 1))
        if num_ticks is None:
            num_ticks = int(rng.integers(tick_range[0], tick_range[1] + 1))
        if alpha is None:
            alpha = float(rng.uniform(0.5, 1.0))
        if beta is None:
            beta = float(rng.uniform(0.0, min(0.5, alpha / 3)))
        if num_nodes < 6 or num_ticks < 2:
            raise InvalidSpec("random preset needs at least 6 nodes and 2 ticks")
        blocks = _random_blocks(rng, num_nodes, num_ticks)
    else:
        raise UnknownPreset(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    spec = ScenarioSpec(blocks=blocks, alpha=float(alpha), beta=float(beta),
                        base_intensity=float(base_intensity), seed=int(seed),
                        horizon=(0, num_ticks - 1),
                        meta={"preset": name, "num_nodes": num_nodes, "num_ticks": num_ticks})
    spec.check()
    return spec
