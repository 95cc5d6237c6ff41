"""Command-line front end.

Exit codes: 0 success, 1 bad input (usage, parse or validation error),
2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from . import benchlab
from .errors import PNMParseError, UnsupportedFormatError, ValidationError
from .hypergraph import areas, decompose, oracle_decompose, reconstruct, run_partition, to_json
from .imagekit import (DEFAULT_THRESHOLD, PATTERNS, SynthSpec, checker_hyperedges, foreground_count,
                       load_pnm, save_pnm, synth)
from .runscan import (ScanStrategy, build_profile, cut_vertex_counts, detect_boundary_columns,
                      hardware_threads)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _strategy_list(text):
    try:
        return [ScanStrategy.parse(v) for v in text.split(",") if v.strip()]
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_pattern_args(p, required=True):
    p.add_argument("--pattern", choices=PATTERNS, required=required, default="full")
    p.add_argument("--seed", type=int, default=0, help="seed for random (default 0)")
    p.add_argument("--k", type=int, default=1, help="band count for hbands (default 1)")
    p.add_argument("--cell", type=int, default=1, help="cell size for checker (default 1)")
    p.add_argument("--density", type=float, default=0.5, help="foreground probability for random (default 0.5)")


def build_parser():
    hw = hardware_threads()
    parser = _Parser(prog="ychg", description="y-convex hypergraph decomposition of binary images")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def input_args(p):
        p.add_argument("--input", required=True, help="P1/P2/P4/P5 file")
        p.add_argument("--threshold", type=int, default=DEFAULT_THRESHOLD,
                       help=f"grayscale samples below this are foreground (default {DEFAULT_THRESHOLD})")

    def threads_arg(p):
        p.add_argument("--threads", type=int, default=hw,
                       help=f"scan worker threads; 1 = serial (default: hardware count, {hw})")

    p = sub.add_parser("decompose", help="write the yCHG of an image as JSON")
    input_args(p)
    threads_arg(p)
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("counts", help="write per-column cut-vertex counts as CSV")
    input_args(p)
    threads_arg(p)
    p.add_argument("--boundaries", action="store_true",
                   help="add a 0/1 boundary column flagging count changes")
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("synth", help="write a synthetic image as P4")
    _add_pattern_args(p)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("verify", help="check oracle equivalence, reconstruction and area conservation")
    input_args(p)
    threads_arg(p)
    p.add_argument("--out", help="report path (default stdout)")

    bench = sub.add_parser("bench", help="timing sweeps")
    axes = bench.add_subparsers(dest="axis", required=True, parser_class=_Parser)

    def bench_args(b):
        b.add_argument("--strategies", type=_strategy_list, default=[ScanStrategy.serial()],
                       help="comma list of serial, parallel:N (default serial)")
        b.add_argument("--op", choices=benchlab.OPS, default="counts", help="timed operation (default counts)")
        b.add_argument("--reps", type=int, default=5, help="timed repetitions (default 5)")
        b.add_argument("--warmup", type=int, default=1, help="untimed warm-up runs (default 1)")
        b.add_argument("--csv", required=True, help="CSV report path")
        b.add_argument("--svg", help="optional SVG chart path")

    b = axes.add_parser("resolution", help="square images of increasing size")
    b.add_argument("--sizes", type=_int_list, required=True, help="comma list of side lengths")
    _add_pattern_args(b, required=False)
    bench_args(b)

    b = axes.add_parser("hyperedges", help="fixed geometry, varying hyperedge count")
    b.add_argument("--width", type=int, required=True)
    b.add_argument("--height", type=int, required=True)
    b.add_argument("--targets", required=True,
                   help="comma list of hyperedge targets; 'max' selects checker(1)")
    bench_args(b)
    return parser


def _strategy(threads):
    return ScanStrategy.serial() if threads == 1 else ScanStrategy.parallel(threads)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _write(path, data):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


def _cmd_decompose(args):
    image = load_pnm(_read(args.input), args.threshold)
    _write(args.out, to_json(decompose(build_profile(image, _strategy(args.threads)))))


def _cmd_counts(args):
    image = load_pnm(_read(args.input), args.threshold)
    counts = cut_vertex_counts(image, _strategy(args.threads)).tolist()
    if args.boundaries:
        flagged = set(detect_boundary_columns(counts))
        lines = ["col,count,boundary"] + [f"{c},{n},{int(c in flagged)}" for c, n in enumerate(counts)]
    else:
        lines = ["col,count"] + [f"{c},{n}" for c, n in enumerate(counts)]
    _write(args.out, ("\n".join(lines) + "\n").encode("ascii"))


def _cmd_synth(args):
    spec = SynthSpec(args.pattern, args.width, args.height, k=args.k, cell=args.cell,
                     density=args.density, seed=args.seed)
    _write(args.out, save_pnm(synth(spec)))


def verify_image(image, strategy=ScanStrategy.serial()):
    """``[(property, passed), ...]`` for one image."""
    ychg = decompose(build_profile(image, strategy))
    total, _ = areas(ychg)
    return [
        ("oracle_equivalence", run_partition(ychg) == run_partition(oracle_decompose(image))),
        ("reconstruction_identity", reconstruct(ychg) == image),
        ("area_conservation", total == foreground_count(image)),
    ]


def _cmd_verify(args):
    image = load_pnm(_read(args.input), args.threshold)
    results = verify_image(image, _strategy(args.threads))
    report = "".join(f"{'PASS' if ok else 'FAIL'} {name}\n" for name, ok in results)
    _write(args.out, report.encode("ascii"))
    return 0 if all(ok for _, ok in results) else 1


def _cmd_bench(args):
    if args.axis == "resolution":
        template = SynthSpec(args.pattern, 0, 0, k=args.k, cell=args.cell,
                             density=args.density, seed=args.seed)
        cfg = benchlab.SweepConfig("resolution", tuple(args.sizes), template, tuple(args.strategies),
                                   args.reps, args.warmup, args.op)
        records = benchlab.resolution_sweep(cfg)
    else:
        targets = []
        for token in args.targets.split(","):
            token = token.strip()
            if token == "max":
                targets.append(checker_hyperedges(args.width, args.height, 1))
            else:
                try:
                    targets.append(int(token))
                except ValueError:
                    raise UsageError(f"bad hyperedge target {token!r}") from None
        template = SynthSpec("empty", args.width, args.height)
        cfg = benchlab.SweepConfig("hyperedges", tuple(targets), template, tuple(args.strategies),
                                   args.reps, args.warmup, args.op)
        records = benchlab.hyperedge_sweep(cfg)
    _write(args.csv, benchlab.emit_csv(records))
    if args.svg:
        _write(args.svg, benchlab.emit_svg(records, args.axis))


_COMMANDS = {
    "decompose": _cmd_decompose,
    "counts": _cmd_counts,
    "synth": _cmd_synth,
    "verify": _cmd_verify,
    "bench": _cmd_bench,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args) or 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValidationError, PNMParseError, UnsupportedFormatError) as exc:
        print(f"ychg: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ychg: I/O error: {exc}", file=sys.stderr)
        return 2


def run(argv):
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
