"""
roots / constants subcommands
Root tables of psi(s) = a and the named constants of the expansions.
"""
import argparse
import logging

from commands.common import emit
from config import Config
from services.asympt import expansion_constants
from services.mgf_ldp import clt_params, sigma_star, x_one, x_zero
from services.specfun import CONSTANTS, EULER_GAMMA, psi_roots

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    roots = subparsers.add_parser('roots', help='roots of psi(s) = a')
    roots.add_argument('--a', type=float, default=-EULER_GAMMA,
                       help='target value (default psi(1))')
    roots.add_argument('--count', type=int, default=Config.DEFAULT_ROOT_COUNT,
                       help='number of negative roots')
    roots.set_defaults(handler=roots_handler)

    constants = subparsers.add_parser('constants', help='named constants of the expansions')
    constants.set_defaults(handler=constants_handler)


def roots_handler(args: argparse.Namespace) -> int:
    table = psi_roots(args.a, args.count)
    logger.debug("computed %d roots for a=%r", table.count, args.a)
    return emit(table.to_dict())


def constants_handler(args: argparse.Namespace) -> int:
    mu, sigma2 = clt_params()
    payload = expansion_constants()
    payload.update({
        'mu': mu,
        'sigma2': sigma2,
        'sigma_star': sigma_star(),
        'x_zero': x_zero(),
        'x_one': x_one(),
        'euler_gamma': EULER_GAMMA,
        'zeta2': CONSTANTS.zeta2,
        'zeta3': CONSTANTS.zeta3,
    })
    return emit(payload)
