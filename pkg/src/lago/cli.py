"""Command line interface: ``lago {detect,score,trim,generate,compare,bench}``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid flags,
4 benchmark run failure.  ``LAGO_LOG`` sets the log level (default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import __version__
from .benchgen import PRESETS, generate, preset_scenarios
from .community import DynamicCommunityStructure, trim, validate
from .exceptions import LagoError
from .harness import BenchFailure, instance_specs, run_bench
from .linkstream import read_edge_list, write_edge_list
from .metrics import nvi
from .optimizer import VARIANTS, LagoConfig, run_lago
from .quality import QualityConfig, q_score
from .validation import check_expectation, check_omega, check_seed, check_variant

EXIT_INPUT, EXIT_FLAGS, EXIT_BENCH = 2, 3, 4

logger = logging.getLogger("lago")


class UsageError(Exception):
    """A flag value is invalid (exit 3)."""


class InputError(Exception):
    """An input file cannot be read or parsed (exit 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


# -- argument helpers -----------------------------------------------------------


def _range(text):
    lo, sep, hi = str(text).partition(":")
    try:
        pair = (int(lo), int(hi)) if sep else None
    except ValueError:
        pair = None
    if pair is None or pair[0] > pair[1]:
        raise argparse.ArgumentTypeError(f"expected LO:HI with LO <= HI, got {text!r}")
    return pair


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _positive_int(text):
    value = _nonneg_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _flag(check, name, value):
    try:
        return check(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _add_input_options(p):
    p.add_argument("--delimiter", default=None,
                   help="column separator (default: comma if present, else whitespace)")
    p.add_argument("--tick-duration", default="auto",
                   help="time units per tick, or 'auto' for the GCD of gaps")
    p.add_argument("--horizon", type=_range, default=None,
                   help="inclusive tick range LO:HI (default: observed activity)")
    p.add_argument("--columns", default="0,1,2",
                   help="zero-based positions of t,u,v (default 0,1,2)")


def _add_quality_options(p, default_expectation="MM", default_omega=1.0):
    p.add_argument("--expectation", default=default_expectation,
                   help="null model: JM or MM")
    p.add_argument("--omega", type=float, default=default_omega,
                   help="switch penalty weight (>= 0)")


def _load_stream(args):
    try:
        columns = tuple(int(c) for c in args.columns.split(","))
        if len(columns) != 3:
            raise ValueError
    except ValueError:
        raise UsageError(f"--columns: expected three integers, got {args.columns!r}") from None
    try:
        return read_edge_list(args.input, delimiter=args.delimiter, columns=columns,
                              tick_duration=args.tick_duration, horizon=args.horizon)
    except OSError as exc:
        raise InputError(f"{args.input}: {exc.strerror or exc}") from None
    except LagoError as exc:
        raise InputError(f"{args.input}: {exc}") from None
    except ValueError as exc:  # bad tick duration, horizon narrower than the data, ...
        raise InputError(f"{args.input}: {exc}") from None


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def _load_structure(stream, path):
    data = _load_json(path)
    try:
        structure = DynamicCommunityStructure.from_dict(stream, data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: not a community file ({exc!r})") from None
    return data, structure


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


# -- subcommands ------------------------------------------------------------------


def cmd_detect(args):
    variant = _flag(check_variant, "variant", args.variant)
    expectation = _flag(check_expectation, "expectation", args.expectation)
    omega = _flag(check_omega, "omega", args.omega)
    seed = _flag(check_seed, "seed", args.seed)
    stream = _load_stream(args)
    if stream.m == 0:
        raise InputError(f"{args.input}: no interactions")
    config = LagoConfig.from_variant(variant, expectation, omega, seed=seed)
    report = run_lago(stream, config)
    _emit(_dumps(report.structure.to_dict(expectation, omega)), args.output)
    summary = {"variant": variant, "seed": report.seed, **report.quality.to_dict(),
               "accepted_moves": report.accepted_moves,
               "runtime_ms": round(report.wall_time * 1000.0, 3)}
    print(json.dumps(summary), file=sys.stderr)
    return 0


def cmd_score(args):
    stream = _load_stream(args)
    data, structure = _load_structure(stream, args.communities)
    expectation = _flag(check_expectation, "expectation",
                        args.expectation or data.get("expectation", "MM"))
    omega = _flag(check_omega, "omega",
                  args.omega if args.omega is not None else data.get("omega", 1.0))
    problems = validate(structure)
    if problems:
        raise InputError(f"{args.communities}: " + "; ".join(str(p) for p in problems[:5]))
    if stream.m == 0:
        raise InputError(f"{args.input}: no interactions")
    result = q_score(stream, structure, QualityConfig(expectation, omega))
    _emit(_dumps(result.to_dict()), args.output)
    return 0


def cmd_trim(args):
    stream = _load_stream(args)
    data, structure = _load_structure(stream, args.communities)
    trimmed = trim(structure)
    out = trimmed.to_dict(data.get("expectation", "MM"), data.get("omega", 1.0))
    _emit(_dumps(out), args.output)
    return 0


def cmd_generate(args):
    seed = _flag(check_seed, "seed", args.seed)
    try:
        spec = preset_scenarios(args.preset, args.nodes, args.ticks, seed=seed, alpha=args.alpha,
                                beta=args.beta, base_intensity=args.intensity)
    except LagoError as exc:
        raise UsageError(str(exc)) from None
    stream, truth = generate(spec)
    _emit(write_edge_list(stream), args.output)
    if args.truth:
        _emit(_dumps(truth.to_dict()), args.truth)
    info = {"preset": args.preset, "seed": seed, "nodes": len(stream.nodes),
            "ticks": stream.n_ticks, "m": stream.m, "active": stream.n_active,
            "alpha": spec.alpha, "beta": spec.beta, "communities": truth.num_communities}
    print(json.dumps(info), file=sys.stderr)
    return 0


def cmd_compare(args):
    stream = _load_stream(args)
    _, a = _load_structure(stream, args.first)
    _, b = _load_structure(stream, args.second)
    try:
        value = nvi(a, b, stream)
    except LagoError as exc:
        raise InputError(str(exc)) from None
    _emit(_dumps({"nvi": value, "elements": stream.n_active}), args.output)
    return 0


def cmd_bench(args):
    expectation = _flag(check_expectation, "expectation", args.expectation)
    omega = _flag(check_omega, "omega", args.omega)
    seed = _flag(check_seed, "seed", args.seed)
    variants = None
    if args.variants:
        variants = [_flag(check_variant, "variants", v) for v in args.variants.split(",")]
    try:
        specs = instance_specs(seed, args.instances, preset=args.preset,
                               node_range=args.nodes_range, tick_range=args.ticks_range,
                               num_nodes=args.nodes, num_ticks=args.ticks)
    except LagoError as exc:
        raise UsageError(str(exc)) from None
    start = time.perf_counter()
    status = 0
    try:
        result = run_bench(specs, variants=variants, repeats=args.repeats,
                           expectation=expectation, omega=omega, jobs=args.jobs,
                           clock=args.clock)
    except BenchFailure as exc:
        print(f"lago bench: {exc}", file=sys.stderr)
        result, status = exc.result, EXIT_BENCH
    _emit(result.to_csv(), args.output)
    if args.summary:
        summary = {"seed": seed, "instances": args.instances, "repeats": args.repeats,
                   "expectation": expectation, "omega": omega, **result.summary()}
        _emit(_dumps(summary), args.summary)
    logger.info("bench finished in %.1fs", time.perf_counter() - start)
    return status


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lago", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lago {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("detect", help="find dynamic communities in an edge list")
    p.add_argument("input")
    p.add_argument("--variant", default="LV+E*", help="one of: " + ", ".join(VARIANTS))
    _add_quality_options(p)
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: OS entropy)")
    p.add_argument("-o", "--output", default=None, help="community JSON path (default stdout)")
    _add_input_options(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("score", help="evaluate a community file")
    p.add_argument("input")
    p.add_argument("communities")
    p.add_argument("--expectation", default=None, help="JM or MM (default: from the file)")
    p.add_argument("--omega", type=float, default=None, help="default: from the file")
    p.add_argument("-o", "--output", default=None)
    _add_input_options(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("trim", help="shrink membership runs to active ticks")
    p.add_argument("input")
    p.add_argument("communities")
    p.add_argument("-o", "--output", default=None)
    _add_input_options(p)
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("generate", help="draw a synthetic stream with planted communities")
    p.add_argument("--preset", default="fig-custom", help="one of: " + ", ".join(PRESETS))
    p.add_argument("--nodes", type=_positive_int, default=None)
    p.add_argument("--ticks", type=_positive_int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--intensity", type=float, default=0.1,
                   help="per pair and tick rate scaler (default 0.1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", default=None, help="edge list path (default stdout)")
    p.add_argument("--truth", default=None, help="ground truth community JSON path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compare", help="NVI between two community files")
    p.add_argument("input")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--output", default=None)
    _add_input_options(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="rank all variants over generated instances")
    p.add_argument("--preset", default="random", help="one of: " + ", ".join(PRESETS))
    p.add_argument("--instances", type=_positive_int, default=10)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--variants", default=None, help="comma separated subset")
    _add_quality_options(p)
    p.add_argument("--nodes", type=_positive_int, default=None)
    p.add_argument("--ticks", type=_positive_int, default=None)
    p.add_argument("--nodes-range", type=_range, default=(25, 250))
    p.add_argument("--ticks-range", type=_range, default=(50, 250))
    p.add_argument("--clock", choices=("wall", "work"), default="wall",
                   help="runtime column: wall milliseconds or move evaluations")
    p.add_argument("-o", "--output", default=None, help="rank CSV path (default stdout)")
    p.add_argument("--summary", default=None, help="per-variant rank summary JSON path")
    p.set_defaults(func=cmd_bench)
    return parser


def _configure_logging():
    level = os.environ.get("LAGO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_FLAGS
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lago {args.command}: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except InputError as exc:
        print(f"lago {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
