"""Command line entry point: ``tailrisk table|figure|eval``."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from .errors import AdmissibilityError, DomainError, InsufficientExceedancesError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_EXCEEDANCES = 4


def _count(text: str) -> int:
    """Accept 10000000, 1e7 or 10**7."""
    try:
        if "**" in text:
            base, exp = text.split("**")
            return int(base) ** int(exp)
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"not a positive integer: {text!r}")
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=_count, help="Monte Carlo sample size (default 1e7)")
    common.add_argument("--seed", type=int, help=f"master seed (default {experiments.DEFAULT_SEED})")
    common.add_argument("--workers", type=int, help="sampling threads (default: TAILRISK_WORKERS or 1)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=experiments.FORMATS, help="output format")
    common.add_argument("--digits", type=int, default=6, help="significant digits in CSV output (default 6)")
    common.add_argument("--split-sample", action="store_true",
                        help="estimate thresholds and conditional means on disjoint batches")

    parser = argparse.ArgumentParser(prog="tailrisk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("table", parents=[common], help="reproduce a table")
    t.add_argument("id", choices=sorted(experiments.TABLES))
    f = sub.add_parser("figure", parents=[common], help="curves behind a figure")
    f.add_argument("id", choices=sorted(experiments.FIGURES))
    e = sub.add_parser("eval", parents=[common], help="evaluate a JSON experiment config")
    e.add_argument("config", help="path to the config file")
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _run(args) -> str:
    kw = {"samples": args.samples, "seed": args.seed, "workers": args.workers, "split_sample": args.split_sample}
    if args.command in ("table", "figure"):
        run = experiments.run_table if args.command == "table" else experiments.run_figure
        columns, records = run(args.id, **kw)
        if (args.format or "csv") == "json":
            return experiments.format_json(columns, records)
        return experiments.format_csv(columns, records, args.digits)

    cfg = experiments.load_config(args.config)
    cfg = cfg.replace(samples=args.samples, seed=args.seed, split_sample=args.split_sample or None)
    if args.out is None and cfg.output_path is not None:
        args.out = cfg.output_path
    fmt = args.format or cfg.output_format
    report = experiments.evaluate_config(cfg, args.workers)
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    columns = ["measure", "p", "mc_value", "mc_stderr", "first_order", "second_order", "second_theorem",
               "ratio_first", "ratio_second", "exceedances"]
    return experiments.format_csv(columns, report["results"], args.digits)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _write(_run(args), args.out)
    except InsufficientExceedancesError as exc:
        print(f"tailrisk: insufficient exceedances: {exc}", file=sys.stderr)
        return EXIT_EXCEEDANCES
    except AdmissibilityError as exc:
        print(f"tailrisk: inadmissible model: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DomainError as exc:
        print(f"tailrisk: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"tailrisk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
