# /prefix_filter/bench/cli.py
"""
Prefix Filter Bench CLI
Features: fpr, load-sweep, build-time, analysis and pd-stats subcommands; CSV or JSON output.

Exit codes: 0 success, 1 usage error, 2 filter failure (spare overflow or capacity).
"""

import argparse
import csv
import json
import logging
import sys

from prefix_filter import __version__
from prefix_filter.bench import workloads
from prefix_filter.core.errors import CapacityExceededError, SpareOverflowError, WorkloadError
from prefix_filter.core.spare import SPARE_CLASSES
from prefix_filter.utils.config import get_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FILTER_FAILURE = 2
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class BenchArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def load_factor(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid load factor {text!r}")
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {value}")
    return value


def float_list(text: str) -> list:
    try:
        return [load_factor(part) for part in text.split(",") if part]
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"invalid alpha list {text!r}: {exc}")


def build_parser() -> BenchArgumentParser:
    common = BenchArgumentParser(add_help=False)
    common.add_argument("--n", type=positive_int, default=None, help="keys per filter (default: config bench_n)")
    common.add_argument("--alpha", type=load_factor, default=None, help="bin-table max load factor")
    common.add_argument("--spare", choices=sorted(SPARE_CLASSES), default=None, help="spare filter kind")
    common.add_argument("--seed", type=int, default=0, help="master seed for keys and hashing")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    common.add_argument("--trials", type=positive_int, default=None, help="repetitions")
    common.add_argument("--rounds", type=positive_int, default=None, help="load-sweep rounds")
    common.add_argument("--queries", type=positive_int, default=None, help="queries (per round for load-sweep)")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None,
                        help="logging level (default: config log_level)")
    common.add_argument("-v", "--verbose", action="store_true", help="shorthand for --log-level DEBUG")

    parser = BenchArgumentParser(prog="prefix_filter", description="Prefix filter measurement harness.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    sub.add_parser("fpr", parents=[common], help="empirical false positive rate at full load")
    sub.add_parser("load-sweep", parents=[common], help="per-round measurements in 5%% load steps")
    build = sub.add_parser("build-time", parents=[common], help="median build time over trials")
    build.add_argument("--vary-seed", action="store_true", help="use seed + i for trial i and count failures")
    table = sub.add_parser("analysis", parents=[common], help="expected spare fraction over k and alpha")
    table.add_argument("--k-min", type=positive_int, default=5)
    table.add_argument("--k-max", type=positive_int, default=100)
    table.add_argument("--k-step", type=positive_int, default=5)
    table.add_argument("--alphas", type=float_list, default=[0.5, 0.85, 0.95, 1.0])
    sub.add_parser("pd-stats", parents=[common], help="PD cutoff-search statistics over random full PDs")
    return parser


def configure_logging(args):
    level = "DEBUG" if args.verbose else (args.log_level or get_config("log_level"))
    logging.basicConfig(level=str(level).upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def write_rows(rows, fmt: str, out):
    rows = workloads.row_dicts(rows)
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    if not rows:
        return
    writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows({key: "" if value is None else value for key, value in row.items()} for row in rows)


def write_report(report: dict, fmt: str, out):
    if fmt == "csv":
        flat = {key: ";".join(map(str, value)) if isinstance(value, list) else value
                for key, value in report.items()}
        write_rows([flat], fmt, out)
    else:
        json.dump(report, out, indent=2)
        out.write("\n")


def run_command(args):
    """Dispatch one parsed command; returns (payload, is_table)."""
    spec_overrides = {"n": args.n, "alpha": args.alpha, "spare_kind": args.spare, "seed": args.seed,
                      "rounds": args.rounds}
    if args.command == "fpr":
        spec = workloads.default_spec(**spec_overrides)
        return workloads.run_fpr(spec, args.queries or spec.n), False
    if args.command == "load-sweep":
        spec = workloads.default_spec(queries_per_round=args.queries, **spec_overrides)
        return workloads.run_load_sweep(spec), True
    if args.command == "build-time":
        spec = workloads.default_spec(**spec_overrides)
        return workloads.run_build_time(spec, args.trials or 9, args.vary_seed), False
    if args.command == "analysis":
        if args.k_min > args.k_max:
            raise WorkloadError(f"--k-min {args.k_min} exceeds --k-max {args.k_max}")
        n = args.n or int(get_config("bench_n"))
        alphas = [args.alpha] if args.alpha else args.alphas
        return workloads.run_analysis(range(args.k_min, args.k_max + 1, args.k_step), alphas, n), True
    if args.command == "pd-stats":
        return workloads.run_pd_stats(args.trials or 1_000_000, args.seed, args.queries or 100), False
    raise ValueError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    try:
        payload, is_table = run_command(args)
    except (SpareOverflowError, CapacityExceededError) as exc:
        logger.error("Filter failure: %s", exc)
        print(f"prefix_filter: filter failure: {exc}", file=sys.stderr)
        return EXIT_FILTER_FAILURE
    except WorkloadError as exc:
        parser.print_usage(sys.stderr)
        print(f"prefix_filter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("csv" if is_table else "json")
    if args.out == "-":
        (write_rows if is_table else write_report)(payload, fmt, sys.stdout)
    else:
        with open(args.out, "w", newline="") as out:
            (write_rows if is_table else write_report)(payload, fmt, out)
        logger.info("Wrote %s to %s", args.command, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
