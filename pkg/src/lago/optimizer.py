"""Greedy agglomerative optimization of Longitudinal Modularity.

The core loop (RTMM) starts from one time module per active time node and
repeatedly moves whole modules into neighbouring communities, choosing the
best strictly positive gain.  When a level accepts moves, the resulting
communities become the units of the next level.  No graph aggregation takes
place: every gain is recomputed from the constituent active time nodes.

Refinements revisit the coarse result by moving single active time nodes
(STNM), interacting pairs of active time nodes (STEM) or submodules found by
running RTMM inside each community (STMM).  Fast exploration (FE) replaces
full passes by a work queue; RIR runs the refinement after every level instead
of once at the end.
"""

from __future__ import annotations

import logging
import secrets
import time
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .community import NEW, DynamicCommunityStructure, check_valid
from .exceptions import EmptyStream, UnknownVariant
from .linkstream import LinkStream
from .quality import IncrementalQuality, QualityBreakdown, QualityConfig, q_score

__all__ = [
    "VARIANTS",
    "FastExplorationSchedule",
    "normalize_variant",
    "LagoConfig",
    "RunReport",
    "TimeModule",
    "candidate_neighbors",
    "refine_stem",
    "refine_stmm",
    "refine_stnm",
    "rtmm_level",
    "run_lago",
]

logger = logging.getLogger(__name__)

#: Minimum gain for a move to count as an improvement.
GAIN_EPS = 1e-12

# name -> (refinement, stmm, fast exploration, refinement in RTMM)
VARIANTS = {
    "LV": (None, False, False, False),
    "LV*": (None, False, True, False),
    "IM+N": ("STNM", True, False, False),
    "IM+N*": ("STNM", True, True, False),
    "IM+E": ("STEM", True, False, False),
    "IM+E*": ("STEM", True, True, False),
    "LVxN": ("STNM", False, False, True),
    "LVxN*": ("STNM", False, True, True),
    "LVxE": ("STEM", False, False, True),
    "LVxE*": ("STEM", False, True, True),
    "LV+N": ("STNM", False, False, False),
    "LV+N*": ("STNM", False, True, False),
    "LV+E": ("STEM", False, False, False),
    "LV+E*": ("STEM", False, True, False),
}


def normalize_variant(name: str) -> str:
    """Map typographic spellings (``LV×N⋆``, ``LV + E ★``) onto the table names."""
    key = (str(name).replace("×", "x").replace("⋆", "*").replace("★", "*")
           .replace("☆", "*").replace(" ", ""))
    if key not in VARIANTS:
        raise UnknownVariant(f"unknown variant {name!r}; expected one of {', '.join(VARIANTS)}")
    return key


@dataclass(frozen=True)
class LagoConfig:
    """Flags selecting one optimizer variant.

    ``refinement`` is None, ``"STNM"`` or ``"STEM"`` (STEM also performs single
    time node moves).  ``stmm`` adds submodule movements to the refinement.
    ``placement`` is ``"PostHoc"`` or ``"InRTMM"``; ``exploration`` is
    ``"Exhaustive"`` or ``"Fast"``.
    """

    quality: QualityConfig = field(default_factory=QualityConfig)
    refinement: str | None = None
    stmm: bool = False
    placement: str = "PostHoc"
    exploration: str = "Exhaustive"
    seed: int | None = None
    max_outer_iters: int = 100
    variant_name: str | None = None
    move_rule: str = "best"

    def __post_init__(self):
        if self.refinement not in (None, "STNM", "STEM"):
            raise ValueError(f"unknown refinement {self.refinement!r}")
        if self.placement not in ("PostHoc", "InRTMM"):
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.exploration not in ("Exhaustive", "Fast"):
            raise ValueError(f"unknown exploration {self.exploration!r}")
        if self.move_rule not in ("best", "first"):
            raise ValueError(f"unknown move rule {self.move_rule!r}")
        if self.refinement is None and (self.stmm or self.placement == "InRTMM"):
            raise ValueError("STMM and RIR require a single time node refinement")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")

    @classmethod
    def from_variant(cls, name: str, expectation: str = "MM", omega: float = 1.0,
                     seed: int | None = None, **kwargs) -> "LagoConfig":
        name = normalize_variant(name)
        refinement, stmm, fast, rir = VARIANTS[name]
        return cls(
            quality=QualityConfig(expectation, omega),
            refinement=refinement,
            stmm=stmm,
            placement="InRTMM" if rir else "PostHoc",
            exploration="Fast" if fast else "Exhaustive",
            seed=seed,
            variant_name=name,
            **kwargs,
        )

    @property
    def fast(self) -> bool:
        return self.exploration == "Fast"

    @property
    def rir(self) -> bool:
        return self.placement == "InRTMM"


@dataclass(frozen=True)
class TimeModule:
    id: int
    members: frozenset

    def __len__(self):
        return len(self.members)


@dataclass
class LevelTrace:
    phase: str
    level: int
    units_before: int
    communities_after: int
    moves: int
    q: float


@dataclass
class RunReport:
    structure: DynamicCommunityStructure
    quality: QualityBreakdown
    accepted_moves: int
    wall_time: float
    trace: list
    seed: int
    config: LagoConfig
    evaluations: int = 0
    move_gains: list = field(default_factory=list, repr=False)


class FastExplorationSchedule:
    """Work queue of movable units.

    Seeded with every unit in random order; :meth:`push` re-enqueues units
    after a successful move unless they are already waiting.
    """

    def __init__(self, units, rng=None):
        order = list(units)
        if rng is not None and order:
            order = [order[i] for i in rng.permutation(len(order))]
        self._queue = deque(order)
        self._queued = set(order)

    def __iter__(self):
        return self

    def __next__(self):
        if not self._queue:
            raise StopIteration
        x = self._queue.popleft()
        self._queued.discard(x)
        return x

    def push(self, units) -> None:
        for x in units:
            if x not in self._queued:
                self._queued.add(x)
                self._queue.append(x)

    def __len__(self):
        return len(self._queue)


class _Optimizer:
    def __init__(self, stream: LinkStream, config: LagoConfig, rng, labels=None):
        self.stream = stream
        self.config = config
        self.rng = rng
        self.state = IncrementalQuality(stream, config.quality, labels)
        self.q = self.state.total()
        self.moves = 0
        self.gains = []
        self.trace = []

    # -- move primitives -----------------------------------------------------

    def _best(self, options):
        """Pick the best (gain, prep, target) among ``(prep, targets)`` options."""
        state = self.state
        first_rule = self.config.move_rule == "first"
        best = None
        for prep, targets in options:
            for t in targets:
                g = state.gain(prep, t)
                if g > GAIN_EPS and (best is None or g > best[0]):
                    best = (g, prep, t)
                    if first_rule:
                        return best
        return best

    def _apply(self, best):
        g, prep, t = best
        self.state.move(prep, t)
        self.q += g
        self.moves += 1
        self.gains.append(g)

    def _record(self, phase, level, units_before, moves):
        self.trace.append(LevelTrace(phase, level, units_before, len(self.state.comms),
                                     moves, self.q))

    # -- RTMM ------------------------------------------------------------------

    def _unit_neighbors(self, X, unit_of):
        state = self.state
        Xs = set(X)
        out = set()
        first, last = {}, {}
        for i in X:
            for j in state.adj[i]:
                if j not in Xs:
                    out.add(unit_of[j])
            u = state.node[i]
            if u not in first or i < first[u]:
                first[u] = i
            if u not in last or i > last[u]:
                last[u] = i
        for i in first.values():
            if state.prev[i] >= 0:
                out.add(unit_of[state.prev[i]])
        for i in last.values():
            if state.next[i] >= 0:
                out.add(unit_of[state.next[i]])
        return out

    def _try_unit(self, X) -> bool:
        state = self.state
        prep = state.prepare(X)
        best = self._best([(prep, state.candidates(prep))])
        if best is None:
            return False
        self._apply(best)
        return True

    def _local_moving(self, units) -> int:
        moves = 0
        if self.config.fast:
            unit_of = [0] * self.stream.n_active
            for x, X in enumerate(units):
                for i in X:
                    unit_of[i] = x
            schedule = FastExplorationSchedule(range(len(units)), self.rng)
            for x in schedule:
                if self._try_unit(units[x]):
                    moves += 1
                    neighbors = self._unit_neighbors(units[x], unit_of)
                    neighbors.discard(x)
                    schedule.push(sorted(neighbors))
            return moves
        while True:
            passed = 0
            for x in self.rng.permutation(len(units)).tolist():
                if self._try_unit(units[x]):
                    passed += 1
            moves += passed
            if not passed:
                return moves

    def _current_units(self):
        state = self.state
        return [sorted(state.members(c)) for c in state.community_ids()]

    def rtmm(self, units, refine_each_level=False) -> bool:
        changed = False
        level = 0
        while True:
            before = len(units)
            moves = self._local_moving(units)
            self._record("rtmm", level, before, moves)
            if refine_each_level:
                refined = self.refine()
                moves += refined
            if not moves:
                return changed
            changed = True
            level += 1
            units = self._current_units()

    # -- refinements -------------------------------------------------------------

    def _atn_neighbors(self, i):
        state = self.state
        out = list(state.adj[i])
        if state.prev[i] >= 0:
            out.append(state.prev[i])
        if state.next[i] >= 0:
            out.append(state.next[i])
        return out

    def _try_atn(self, i, pairs) -> list:
        """Best single (and optionally pair) move of active time node ``i``.

        Returns the moved time nodes, or an empty list.
        """
        state = self.state
        s = state.label[i]
        size = len(state.members(s))
        prep = state.prepare([i])
        targets = state.candidates(prep)
        if size > 1:
            targets.append(NEW)
        options = [(prep, targets)]
        if pairs:
            for j in sorted(state.adj[i]):
                if state.label[j] != s:
                    continue
                pp = state.prepare([i, j])
                pt = state.candidates(pp)
                if size > 2:
                    pt.append(NEW)
                options.append((pp, pt))
        best = self._best(options)
        if best is None:
            return []
        self._apply(best)
        return best[1].X

    def single_moves(self, pairs: bool) -> int:
        """STNM (``pairs=False``) or STEM (``pairs=True``) to quiescence."""
        n = self.stream.n_active
        moves = 0
        if self.config.fast:
            schedule = FastExplorationSchedule(range(n), self.rng)
            for i in schedule:
                moved = self._try_atn(i, pairs)
                if moved:
                    moves += 1
                    touched = set()
                    for x in moved:
                        touched.update(self._atn_neighbors(x))
                    touched.difference_update(moved)
                    schedule.push(sorted(touched))
            return moves
        while True:
            passed = 0
            for i in self.rng.permutation(n).tolist():
                if self._try_atn(i, pairs):
                    passed += 1
            moves += passed
            if not passed:
                return moves

    def _submodules(self, members):
        """Partition ``members`` by running RTMM on their induced sub link stream."""
        stream = self.stream
        mset = set(members)
        labels = stream.nodes
        node, tick = self.state.node, self.state.tick
        edges = [(labels[node[a]], labels[node[b]], tick[a])
                 for a, b in stream._atn_edges if a in mset and b in mset]
        if not edges:
            return [[i] for i in members]
        sub = LinkStream(edges, horizon=stream.horizon)
        sub_config = replace(self.config, refinement=None, stmm=False, placement="PostHoc")
        inner = _Optimizer(sub, sub_config, self.rng)
        inner.rtmm([[i] for i in range(sub.n_active)])
        groups = {}
        for j, c in enumerate(inner.state.label):
            parent = stream._atn_id[(stream._index[sub.nodes[sub._atn_node[j]]],
                                     sub._atn_tick[j])]
            groups.setdefault(c, []).append(parent)
        covered = set()
        out = []
        for c in sorted(groups):
            out.append(sorted(groups[c]))
            covered.update(groups[c])
        out.extend([i] for i in members if i not in covered)
        return out

    def submodule_moves(self) -> int:
        state = self.state
        moves = 0
        for c in state.community_ids():
            if c not in state.comms or len(state.members(c)) < 2:
                continue
            subs = self._submodules(sorted(state.members(c)))
            if len(subs) < 2:
                continue
            for x in self.rng.permutation(len(subs)).tolist():
                X = subs[x]
                src = state.label[X[0]]
                prep = state.prepare(X)
                targets = state.candidates(prep)
                if len(state.members(src)) > len(X):
                    targets.append(NEW)
                best = self._best([(prep, targets)])
                if best is not None:
                    self._apply(best)
                    moves += 1
        return moves

    def refine(self) -> int:
        """Configured refinement, repeated while it keeps improving."""
        config = self.config
        total = 0
        while True:
            moves = self.single_moves(pairs=config.refinement == "STEM")
            self._record(config.refinement, 0, len(self.state.comms), moves)
            if config.stmm:
                sub = self.submodule_moves()
                self._record("STMM", 0, len(self.state.comms), sub)
                moves += sub
            total += moves
            if not moves or not config.stmm:
                return total

    # -- driver ----------------------------------------------------------------

    def run(self):
        config = self.config
        units = [[i] for i in range(self.stream.n_active)]
        for _ in range(config.max_outer_iters):
            changed = self.rtmm(units, refine_each_level=config.rir)
            if config.refinement is not None and not config.rir:
                changed = self.refine() > 0 or changed
            if not changed:
                break
            units = self._current_units()


def _canonical_labels(stream, labels):
    """Relabel communities 0..k-1 by their earliest (tick, node) time node."""
    first = {}
    for i, c in enumerate(labels):
        key = (stream._atn_tick[i], stream._atn_node[i])
        if c not in first or key < first[c]:
            first[c] = key
    order = {c: r for r, c in enumerate(sorted(first, key=first.__getitem__))}
    return [order[c] for c in labels]


def _make_rng(seed):
    return np.random.default_rng(seed)


def run_lago(stream: LinkStream, config: LagoConfig) -> RunReport:
    """Detect dynamic communities on ``stream`` with the configured variant."""
    if stream.m == 0:
        raise EmptyStream()
    seed = config.seed if config.seed is not None else secrets.randbits(63)
    start = time.perf_counter()
    opt = _Optimizer(stream, config, _make_rng(seed))
    opt.run()
    labels = _canonical_labels(stream, opt.state.label)
    structure = DynamicCommunityStructure.from_labels(stream, labels)
    elapsed = time.perf_counter() - start
    quality = q_score(stream, structure, config.quality)
    logger.debug("variant %s: Q=%.6f, %d communities, %d moves in %.3fs",
                 config.variant_name, quality.total, quality.num_communities,
                 opt.moves, elapsed)
    return RunReport(
        structure=structure,
        quality=quality,
        accepted_moves=opt.moves,
        wall_time=elapsed,
        trace=opt.trace,
        seed=seed,
        config=config,
        evaluations=opt.state.evaluations,
        move_gains=opt.gains,
    )


# -- public single-phase entry points ---------------------------------------------


def _labels_from_modules(stream, modules):
    labels = [None] * stream.n_active
    for module in modules:
        for atn in module.members:
            labels[stream.atn_index(atn)] = module.id
    if any(x is None for x in labels):
        raise ValueError("modules must cover every active time node")
    return labels


def _modules_from_state(stream, state):
    atns = stream.active_nodes
    return [TimeModule(c, frozenset(atns[i] for i in state.members(c)))
            for c in state.community_ids()]


def rtmm_level(stream: LinkStream, modules, config: LagoConfig) -> list:
    """Run the recursive module mover from ``modules`` (a partition of A)."""
    modules = list(modules)
    labels = _labels_from_modules(stream, modules)
    opt = _Optimizer(stream, config, _make_rng(config.seed), labels)
    opt.rtmm([sorted(stream.atn_index(a) for a in m.members) for m in modules])
    return _modules_from_state(stream, opt.state)


def candidate_neighbors(stream: LinkStream, modules, M: TimeModule) -> set:
    """Ids of modules linked to ``M`` by an interaction or by temporal adjacency."""
    owner = {}
    for module in modules:
        for atn in module.members:
            owner[stream.atn_index(atn)] = module.id
    ids = [stream.atn_index(a) for a in M.members]
    mine = set(ids)
    out = set()
    first, last = {}, {}
    offsets = stream._node_offsets
    for i in ids:
        for j in stream._atn_adj[i]:
            if j not in mine:
                out.add(owner[j])
        u = stream._atn_node[i]
        first[u] = min(first.get(u, i), i)
        last[u] = max(last.get(u, i), i)
    for u, i in first.items():
        if i > offsets[u] and i - 1 not in mine:
            out.add(owner[i - 1])
    for u, i in last.items():
        if i + 1 < offsets[u + 1] and i + 1 not in mine:
            out.add(owner[i + 1])
    out.discard(M.id)
    return out


def _refine_public(stream, structure, config, action):
    check_valid(structure)
    labels = structure.labels()
    opt = _Optimizer(stream, config, _make_rng(config.seed), labels)
    action(opt)
    return DynamicCommunityStructure.from_labels(stream, opt.state.label)


def refine_stnm(stream: LinkStream, structure: DynamicCommunityStructure,
                config: LagoConfig) -> DynamicCommunityStructure:
    """Move single active time nodes between communities until no gain remains."""
    return _refine_public(stream, structure, config, lambda o: o.single_moves(pairs=False))


def refine_stem(stream: LinkStream, structure: DynamicCommunityStructure,
                config: LagoConfig) -> DynamicCommunityStructure:
    """Like :func:`refine_stnm`, also moving interacting co-member pairs together."""
    return _refine_public(stream, structure, config, lambda o: o.single_moves(pairs=True))


def refine_stmm(stream: LinkStream, structure: DynamicCommunityStructure,
                config: LagoConfig) -> DynamicCommunityStructure:
    """One submodule-movement pass over every community."""
    return _refine_public(stream, structure, config, lambda o: o.submodule_moves())
