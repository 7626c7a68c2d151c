"""
Command-line driver for the verification campaigns.

The JSON report goes to stdout and the human summary to stderr. Exit code 0 means every
check passed, 1 means some check failed, 2 means the configuration or an input file was
rejected; the report then holds a single failed "input" check naming the error.
"""

import argparse
import logging
import math
import sys

from rich.console import Console
from rich.table import Table

from . import __version__
from .codec import write_json
from .errors import CodecError, ConfigError, NclpError
from .shared import load_config, set_log_level
from .suites import COMMANDS, SCHEMA, CheckRecord, Report, RunConfig, run

logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_INPUT_ERROR = 2

HELP = {
    "clarkson": "Clarkson equality vs orthogonality campaign",
    "decompose": "Decompose a LinearMap JSON (--in) or run the Yeadon/L1 round trips",
    "construct": "Build the isometry of a triple JSON (--in) or compare the three constructions",
    "stormer": "Stormer identities for positive projections onto Jordan images",
    "modular": "Modular group, cosine family, Phi-transform and cocycle checks",
    "hs-check": "Haagerup-Størmer conditions on positive and negative cases",
    "factor": "Factorization round trip of positive projections",
    "ep-m2": "Bloch-sphere c.f.m. on M2 without a linear extension",
    "paving": "Conditional expectations along increasing projection chains",
    "suite": "Every campaign above",
}


def build_parser(defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nclp",
        description="Verify isometries between finite-dimensional noncommutative L^p spaces"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, default=3.0, help="Exponent p >= 1 (default: 3)")
    common.add_argument("--seed", type=int, default=defaults["seed"], help="Seed of every trial stream")
    common.add_argument("--trials", type=int, default=100, help="Upper bound on trials per check")
    common.add_argument("--tol", type=float, default=defaults["tol"], help="Residual tolerance (NCLP_TOL)")
    common.add_argument("--in", dest="input", metavar="FILE", help="Input JSON for decompose/construct/ep-m2")
    common.add_argument("--out", dest="output", metavar="FILE", help="Write the produced artifact to FILE")
    common.add_argument("--workers", type=int, default=defaults["workers"],
                        help="Threads for independent trials (NCLP_WORKERS)")
    common.add_argument("--log-level", default=defaults["log_level"], help="Logging level (NCLP_LOG_LEVEL)")

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=HELP[command])
    return parser


def print_summary(report: Report, console: Console) -> None:
    table = Table(title=f"nclp {report.config.command} (p={report.config.p:g}, seed={report.config.seed})")
    table.add_column("", width=2)
    table.add_column("check")
    table.add_column("max residual", justify="right")
    table.add_column("threshold", justify="right")
    table.add_column("ms", justify="right")
    for record in report.checks:
        table.add_row(
            "[green]✓[/green]" if record.passed else "[red]✗[/red]",
            record.name,
            f"{record.max_residual:.3e}",
            f"{record.threshold:.1e}",
            f"{record.elapsed_ms:.1f}",
        )
    console.print(table)
    failed = [r.name for r in report.checks if not r.passed]
    if failed:
        console.print(f"[red]✗ {len(failed)} of {len(report.checks)} checks failed[/red]")
    else:
        console.print(f"[green]✓ all {len(report.checks)} checks passed[/green]")


def input_error_report(args: argparse.Namespace | None, error: NclpError) -> dict:
    """A failed one-check report for input that was rejected before any campaign ran."""
    witness = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, CodecError):
        witness["path"] = error.path
    config = None
    if args is not None:
        config = {key: getattr(args, key) for key in ("command", "p", "seed", "trials", "tol", "input", "output")}
    record = CheckRecord("input", False, math.inf, 0.0 if args is None else args.tol, witness)
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": None if args is None else args.command,
        "config": config,
        "checks": [record.as_dict()],
        "passed": False,
    }


def main(argv=None) -> int:
    """Entry point of the nclp console script."""
    console = Console(stderr=True)
    try:
        defaults = load_config()
    except ConfigError as e:
        console.print(f"[red]✗ {e}[/red]")
        print(write_json(input_error_report(None, e)))
        return EXIT_INPUT_ERROR

    args = build_parser(defaults).parse_args(argv)
    try:
        set_log_level(args.log_level)
    except ValueError:
        error = ConfigError(f"Unknown log level {args.log_level!r}")
        console.print(f"[red]✗ {error}[/red]")
        print(write_json(input_error_report(args, error)))
        return EXIT_INPUT_ERROR

    try:
        config = RunConfig(
            command=args.command,
            p=args.p,
            seed=args.seed,
            trials=args.trials,
            tol=args.tol,
            input=args.input,
            output=args.output,
            workers=args.workers,
        )
        report = run(config)
    except (ConfigError, CodecError, NclpError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        console.print(f"[red]✗ {e}[/red]")
        print(write_json(input_error_report(args, e)))
        return EXIT_INPUT_ERROR

    print(write_json(report.as_dict()))
    print_summary(report, console)
    return EXIT_PASSED if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
