"""``tilefft`` command line: run the size sweep and write reports."""

import argparse
import logging
import sys

from .bench import SuiteError, emit_plot, emit_report, format_csv, format_json, parse_sizes, report_metadata, run_suite

log = logging.getLogger("tilefft")


def build_parser():
    p = argparse.ArgumentParser(
        prog="tilefft",
        description="Benchmark the tiled FFT against the level-wise baseline and the O(N^2) oracle.",
    )
    p.add_argument("--sizes", default="table1", help="comma list of powers of two, or 'table1' (default)")
    p.add_argument("--tile-capacity", type=int, default=1024, help="elements per fast-memory tile")
    p.add_argument("--oracle-max", type=int, default=8192, help="largest N checked against the O(N^2) DFT")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="PATH", help="report file (default: stdout)")
    p.add_argument("--plot", metavar="PATH", help="also write an SVG plot")
    p.add_argument("--reps", type=int, default=9, help="timed repetitions per row, best-of (>= 5)")
    p.add_argument("--seed", type=int, default=0, help="seed of the random test signals")
    p.add_argument("--threads", type=int, default=1, help="workers for the tiled executor")
    return p


def _emit(rows, args, metadata):
    if args.out:
        emit_report(rows, args.format, args.out, metadata=metadata)
    else:
        sys.stdout.write(format_csv(rows) if args.format == "csv" else format_json(rows))


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        sizes = parse_sizes(args.sizes)
        if args.threads < 1:
            raise ValueError(f"--threads must be >= 1, got {args.threads}")
        metadata = report_metadata(sizes, args.tile_capacity, args.oracle_max, args.reps, args.seed, args.threads)
        rows = run_suite(sizes, tile_capacity=args.tile_capacity, oracle_max=args.oracle_max,
                         reps=args.reps, seed=args.seed, threads=args.threads)
    except SuiteError as exc:
        log.error("%s", exc)
        if exc.rows:
            _emit(exc.rows, args, dict(metadata, partial=True, error=str(exc)))
        return 1
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    try:
        _emit(rows, args, metadata)
        if args.plot:
            emit_plot(rows, args.plot)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
