import argparse
import logging
import sys
from typing import List, Optional

from commands import asympt, exact, ldp, mellin, roots, simulate, verify
from config import Config, configure_logging
from errors import DomainError, NumericalContractError, ResourceError

logger = logging.getLogger(__name__)

USAGE_ERROR = 1
NUMERICAL_ERROR = 2

# registration order is the order shown in --help
COMMANDS = (roots, exact, asympt, mellin, ldp, simulate, verify)


class _Parser(argparse.ArgumentParser):
    """Usage errors print the help text and exit with code 1"""

    def error(self, message: str) -> None:
        self.print_help(sys.stderr)
        sys.stderr.write(f"\nerror: {message}\n")
        sys.exit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='betasplit',
                     description='Numerical toolkit for the critical beta-splitting tree')
    parser.add_argument('--threads', type=int, default=Config.THREADS,
                        help='worker processes for simulations')
    parser.add_argument('--log-level', default=None, help='override LOGGING_LEVEL')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    if args.command is None:
        parser.print_help(sys.stderr)
        return USAGE_ERROR
    if args.threads < 1:
        parser.error("--threads must be >= 1")

    try:
        return args.handler(args)
    except DomainError as e:
        logger.error("%s: %s", args.command, e)
        return USAGE_ERROR
    except (NumericalContractError, ResourceError) as e:
        logger.error("%s: %s", args.command, e)
        return NUMERICAL_ERROR


if __name__ == '__main__':
    sys.exit(main())
