"""
Command-line front end for billboard-salience.

    billboard-salience saliency  --manifest M --out DIR [--method ID] [--preview]
    billboard-salience calibrate --manifest M --out DIR [--threshold T]
    billboard-salience evaluate  --manifest M --out DIR [--threshold T]
    billboard-salience compare   --manifest M --out DIR --method A --method B
    billboard-salience synth     --out DIR [--seed S] [--size N]

Logs go to stderr as JSON lines; artifacts go to --out and their paths are
printed on stdout. Exit codes: 0 success, 1 usage error, 2 data error (any
error entry in the run), 3 internal error.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .errors import SalienceError, UsageError, describe_error
from .logging_config import configure_logging, get_logger
from .monitoring import health_monitor
from .pipeline import (
    METHOD_SPECTRAL_RESIDUAL,
    RunConfig,
    run_calibration,
    run_comparison,
    run_evaluation,
    run_saliency,
)
from .saliency import SpectralResidualParams
from .synth import MANIFEST_NAME, generate_dataset
from .worker_pool import WorkerPool

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

COMMANDS = ("saliency", "calibrate", "evaluate", "compare", "synth")


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports bad arguments as UsageError instead of exiting with 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="Dataset manifest (JSON Lines); output location for synth")
    common.add_argument("--out", required=True, help="Output directory for every artifact")
    common.add_argument(
        "--method",
        action="append",
        help=f"Saliency method: {METHOD_SPECTRAL_RESIDUAL!r} (default) or 'external:<dir>'; repeat for compare",
    )
    common.add_argument("--working-width", type=int, help="Spectral-residual working width in pixels")
    common.add_argument("--mean-filter", type=int, help="Spectral-residual mean filter size (odd)")
    common.add_argument("--blur-sigma", type=float, help="Spectral-residual Gaussian blur sigma")
    common.add_argument("--threshold", type=float, help="Significance threshold override in [0, 1]")
    common.add_argument("--workers", type=int, default=1, help="Concurrent per-image workers (default: 1)")
    common.add_argument("--seed", type=int, default=0, help="Random seed for synth (default: 0)")
    common.add_argument("--size", type=int, default=6, help="Number of synthetic images (default: 6)")
    common.add_argument("--preview", action="store_true", help="Also write an 8-bit .pgm of each saliency map")
    common.add_argument("--log-level", default="INFO", help="Log level for stderr (default: INFO)")

    parser = _ArgumentParser(
        prog="billboard-salience",
        description="Billboard saliency: maps, significance classification and evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    helps = {
        "saliency": "Write a saliency map per image",
        "calibrate": "Calibrate the significance threshold on the train split",
        "evaluate": "Evaluate saliency, significance and detection on the test split",
        "compare": "Evaluate several saliency methods side by side",
        "synth": "Generate a deterministic synthetic dataset",
    }
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=helps[name])
    return parser


def _params(args: argparse.Namespace) -> SpectralResidualParams:
    overrides = {
        "working_width": args.working_width,
        "mean_filter_size": args.mean_filter,
        "post_blur_sigma": args.blur_sigma,
    }
    try:
        return dataclasses.replace(
            SpectralResidualParams(), **{k: v for k, v in overrides.items() if v is not None}
        )
    except ValueError as e:
        raise UsageError(str(e)) from e


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments into a RunConfig."""
    methods = args.method or [METHOD_SPECTRAL_RESIDUAL]
    if args.command != "compare" and len(methods) > 1:
        raise UsageError(f"{args.command} takes a single --method")
    manifest = args.manifest
    if manifest is None:
        if args.command != "synth":
            raise UsageError(f"{args.command} requires --manifest")
        manifest = str(Path(args.out) / MANIFEST_NAME)
    return RunConfig(
        manifest_path=manifest,
        out_dir=args.out,
        method=methods[0],
        params=_params(args),
        threshold=args.threshold,
        workers=args.workers,
        seed=args.seed,
        size=args.size,
        preview=args.preview,
    )


def _report_errors(errors: Sequence[str]) -> int:
    for message in errors:
        logger.error("run_error", message=message)
    return EXIT_DATA if errors else EXIT_OK


def run_command(args: argparse.Namespace) -> int:
    """Execute one parsed command and return its exit code."""
    config = config_from_args(args)
    pool = WorkerPool(pool_size=config.workers)
    try:
        if args.command == "synth":
            print(generate_dataset(config.out_dir, config.seed, config.size, config.manifest_path))
            return EXIT_OK
        if args.command == "saliency":
            run = run_saliency(config, pool)
            for path in run.written:
                print(path)
            return _report_errors(run.errors)
        if args.command == "calibrate":
            run = run_calibration(config, pool)
            print(run.path)
            return _report_errors(run.errors)
        if args.command == "evaluate":
            report, path = run_evaluation(config, pool)
            print(path)
            return _report_errors(report.all_errors)
        if args.command == "compare":
            reports, path = run_comparison(config, args.method or [METHOD_SPECTRAL_RESIDUAL], pool)
            print(path)
            errors = [e for report in reports for e in report.all_errors]
            failed_methods = len(args.method or []) - len(reports)
            return EXIT_DATA if failed_methods > 0 else _report_errors(errors)
        raise UsageError(f"unknown command {args.command!r}")
    finally:
        health = health_monitor.check_health(pool)
        logger.info(
            "run_health",
            command=args.command,
            status=health["status"],
            process_memory_mb=round(health["process_memory_mb"], 1),
            worker_pool=health["worker_pool"],
        )


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``billboard-salience`` command."""
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        return run_command(args)
    except UsageError as e:
        logger.error("usage_error", error=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SalienceError as e:
        logger.error("data_error", error=str(e), error_type=type(e).__name__)
        return e.exit_code
    except OSError as e:
        logger.error("io_error", error=describe_error(e), error_type=type(e).__name__)
        return EXIT_DATA
    except Exception as e:
        logger.exception("internal_error", error=str(e), error_type=type(e).__name__)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
