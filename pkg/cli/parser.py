# parser.py - Command-line parser and entry point

import argparse
import logging
from typing import Optional, Sequence

from cli.commands import run
from cli.run_config import load_run_config
from core.config import BUILTIN_DOMAINS, COMMANDS, DESCENT_METHODS, TOOL_NAME, TOOL_VERSION
from core.error_handling import handle_command_error

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "poisson": "Solve the (p, mu)-Poisson problem",
    "eigen": "Compute the first (p, mu)-eigenpair",
    "measure-report": "Fit the growth exponent of a measure",
    "analyze": "Regularity checks on the first eigenfunction",
    "counterexample": "Log-Cantor counterexample at p = 2",
}


def _common_flags() -> argparse.ArgumentParser:
    """Flags shared by every command. Unset flags stay None so config files can fill them."""
    common = argparse.ArgumentParser(add_help=False)
    run_group = common.add_argument_group("run")
    run_group.add_argument("--config", help="INI config file or a previous manifest.json")
    run_group.add_argument("--out", help="Output directory")
    run_group.add_argument("--domain", choices=list(BUILTIN_DOMAINS))
    run_group.add_argument("--mesh", help="Mesh file to read instead of --domain")
    run_group.add_argument("--resolution", type=int)
    run_group.add_argument("--seed", type=int, action="append", help="Repeat for several seeds")
    run_group.add_argument("--forcing", help="constant:C or manufactured")
    run_group.add_argument("--verbose", action="store_true", help="Debug logging")

    params = common.add_argument_group("solver parameters")
    params.add_argument("--p", type=float)
    params.add_argument("--q", type=float)
    params.add_argument("--grad-reg", type=float)
    params.add_argument("--tol-energy", type=float)
    params.add_argument("--tol-residual", type=float)
    params.add_argument("--max-iter", type=int)
    params.add_argument("--descent", choices=DESCENT_METHODS)

    measure = common.add_argument_group("measure")
    measure.add_argument("--measure", help="lebesgue | ifs:PATH_OR_NAME:DEPTH | log-cantor:Q:LEVEL")
    measure.add_argument("--r0", type=float, help="Base ball diameter of the log-Cantor tree")

    analysis = common.add_argument_group("analysis")
    analysis.add_argument("--resolutions", help="Comma-separated mesh resolutions (counterexample)")
    analysis.add_argument("--pair-budget", type=int)
    analysis.add_argument("--num-seeds", type=int)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="(p, mu)-Laplacian solver and checks")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=COMMAND_HELP[command])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return the exit code."""
    args = build_parser().parse_args(argv)
    # No-op when main.py already configured logging
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        config = load_run_config(args)
        return run(config)
    except Exception as e:
        return handle_command_error(e)
