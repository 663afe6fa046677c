"""Run every optimizer variant over a batch of generated instances and rank them."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .benchgen import generate, preset_scenarios
from .metrics import rank_variants
from .optimizer import VARIANTS, LagoConfig, run_lago

__all__ = ["BenchFailure", "BenchResult", "CSV_HEADER", "instance_specs", "run_bench"]


CSV_HEADER = ("instance", "variant", "seed", "runtime_ms", "q_value", "rank_time", "rank_q")

_STREAMS = {}


class BenchFailure(RuntimeError):
    """Raised when at least one run failed; carries the ranked rows of complete instances."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass
class BenchResult:
    raw: list
    table: object
    clock: str

    def to_csv(self) -> str:
        order = {v: i for i, v in enumerate(VARIANTS)}
        rows = sorted(self.table.rows, key=lambda r: (r["instance"], order.get(r["variant"], 99)))
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            runtime = (f"{r['runtime_ms']:.3f}" if self.clock == "wall"
                       else f"{r['runtime_ms']:.1f}")
            writer.writerow([r["instance"], r["variant"], r["seed"], runtime,
                             repr(r["q_value"]), _rank(r["rank_time"]), _rank(r["rank_q"])])
        return out.getvalue()

    def summary(self) -> dict:
        return {"clock": self.clock, "variants": self.table.summary()}


def _rank(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def instance_specs(seed, instances, *, preset="random", node_range=(25, 250),
                   tick_range=(50, 250), num_nodes=None, num_ticks=None):
    """``instances`` scenario specs whose seeds derive from ``seed``."""
    seeds = np.random.SeedSequence(seed).generate_state(instances, dtype=np.uint32).tolist()
    return [
        (f"{preset}-{i:03d}",
         preset_scenarios(preset, num_nodes, num_ticks, seed=int(s), node_range=node_range,
                          tick_range=tick_range))
        for i, s in enumerate(seeds)
    ]


def _run_seed(instance_seed, variant_index, repeat):
    state = np.random.SeedSequence([instance_seed, variant_index, repeat]).generate_state(
        1, dtype=np.uint64)
    return int(state[0]) >> 1


def _job(args):
    name, spec, variant, repeat, expectation, omega = args
    stream = _STREAMS.get(name)
    if stream is None:
        stream = generate(spec)[0]
        _STREAMS.clear()
        _STREAMS[name] = stream
    seed = _run_seed(spec.seed, list(VARIANTS).index(variant), repeat)
    config = LagoConfig.from_variant(variant, expectation, omega, seed=seed)
    try:
        report = run_lago(stream, config)
    except Exception as exc:  # reported back to the parent, which decides the exit status
        return {"instance": name, "variant": variant, "repeat": repeat, "error": repr(exc)}
    return {
        "instance": name, "variant": variant, "repeat": repeat, "seed": spec.seed,
        "wall_ms": report.wall_time * 1000.0, "evaluations": report.evaluations,
        "q_value": report.quality.total,
    }


def run_bench(specs, *, variants=None, repeats=3, expectation="MM", omega=1.0, jobs=1,
              clock="wall") -> BenchResult:
    """Run ``variants`` x ``repeats`` on every ``(name, spec)`` and rank per instance.

    ``clock="work"`` replaces wall time by the number of move evaluations,
    which makes the output reproducible byte for byte.
    """
    if clock not in ("wall", "work"):
        raise ValueError(f"clock must be 'wall' or 'work', got {clock!r}")
    variants = list(VARIANTS) if variants is None else list(variants)
    tasks = [(name, spec, v, r, expectation, omega)
             for name, spec in specs for v in variants for r in range(repeats)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_job, tasks, chunksize=max(1, len(variants) * repeats)))
    else:
        raw = [_job(t) for t in tasks]
    raw.sort(key=lambda r: (r["instance"], r["variant"], r["repeat"]))

    failed = {r["instance"] for r in raw if "error" in r}
    rows = [
        {"instance": r["instance"], "variant": r["variant"], "seed": r["seed"],
         "runtime_ms": r["wall_ms"] if clock == "wall" else float(r["evaluations"]),
         "q_value": r["q_value"]}
        for r in raw if r["instance"] not in failed
    ]
    result = BenchResult(raw=raw, table=rank_variants(rows), clock=clock)
    if failed:
        errors = [f"{r['instance']}/{r['variant']}: {r['error']}" for r in raw if "error" in r]
        raise BenchFailure(f"{len(errors)} run(s) failed: " + "; ".join(errors[:3]), result)
    return result
