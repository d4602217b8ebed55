"""
ILEG command-line entry point
"""

import argparse
import sys
from typing import List, Optional

from app.cli.commands import cmd_evaluate, cmd_solve
from app.core.config import settings
from app.core.error_handlers import EXIT_USAGE, exit_code_for, format_diagnostic
from app.core.exceptions import IlegException, ValidationError
from app.core.logging import logger


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as exceptions instead of exiting with status 2"""

    def error(self, message: str):
        raise ValidationError(message, field="argv")


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser"""
    parser = _Parser(
        prog="ileg",
        description="Risk-sensitive iterative LQ solver",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run.py solve --config configs/cliff.json --sigma=45,35,0,-45,-100 --out runs/sweep/
  python run.py solve --config configs/scalar_lq.json --sigma 0 --out runs/lq/
  python run.py evaluate --run runs/sweep/ --sigma=-100 --samples 2000 --seed 7
  python run.py evaluate --run runs/sweep/ --noise-scale 0 --out runs/sweep-noiseless/

Negative sigma lists must be attached with '=' (--sigma=-45,-100).
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)

    # solve
    solve = subparsers.add_parser("solve", help="solve one sigma or a sweep and write a run directory")
    solve.add_argument("--config", required=True, help="problem-config JSON file")
    solve.add_argument("--sigma", help="comma-separated risk parameters (default: the config's sigma)")
    solve.add_argument("--out", required=True, help="output directory")
    solve.add_argument("--steps", type=int, help=f"grid intervals (default: {settings.grid_steps})")
    solve.add_argument("--tol", type=float, help=f"relative cost tolerance (default: {settings.cost_tolerance:g})")
    solve.add_argument("--max-iters", type=int, help=f"iteration cap (default: {settings.max_iterations})")
    solve.add_argument("--samples", type=int, help="also run a Monte-Carlo evaluation with N samples")
    solve.add_argument("--seed", type=int, help=f"Monte-Carlo seed (default: {settings.rng_seed})")
    solve.add_argument("--workers", type=int, help="worker threads for sweeps and sampling")
    solve.set_defaults(handler=cmd_solve)

    # evaluate
    evaluate = subparsers.add_parser("evaluate", help="Monte-Carlo evaluation of a solved run")
    evaluate.add_argument("--run", required=True, help="run directory written by solve")
    evaluate.add_argument("--sigma", help="comma-separated subset of the run's sigmas")
    evaluate.add_argument("--samples", type=int, help="sample count (default: the run's setting)")
    evaluate.add_argument("--seed", type=int, help="seed (default: the run's setting)")
    evaluate.add_argument("--noise-scale", type=float, default=1.0, help="multiplies every noise SD (0 disables noise)")
    evaluate.add_argument("--out", help="directory for evaluation files (default: the run directory)")
    evaluate.add_argument("--workers", type=int, help="worker threads for sampling")
    evaluate.set_defaults(handler=cmd_evaluate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise ValidationError("a command is required (solve or evaluate); see --help", field="command")
        return args.handler(args)
    except IlegException as exc:
        logger.debug(f"Command failed: {exc.message}", extra={"error_code": exc.error_code, **exc.details})
        print(format_diagnostic(exc), file=sys.stderr)
        return exit_code_for(exc) if exc.error_code else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
