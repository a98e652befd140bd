"""asympt subcommand: partial sums of the asymptotic expansions"""
import argparse

from commands.common import emit
from config import Config
from errors import DomainError
from services.asympt import (
    a_limit,
    ed_expansion,
    el_expansion,
    length_expansion,
    moment_expansion,
    subtree_count_limit,
    var_d_approx,
)

KINDS = ('ed', 'el', 'length', 'moment', 'var', 'alimit')


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('asympt', help='asymptotic expansions at a given n')
    parser.add_argument('--kind', choices=KINDS, required=True)
    parser.add_argument('--n', type=int, default=None)
    parser.add_argument('--N', type=int, default=Config.DEFAULT_POLE_COUNT,
                        help='number of negative-root poles')
    parser.add_argument('--k', type=int, default=2, help='moment order for --kind moment')
    parser.add_argument('--j', type=int, default=None, help='state for --kind alimit')
    parser.add_argument('--dps', type=int, default=None,
                        help='evaluate ed/el/length in mpmath at this precision')
    parser.set_defaults(handler=asympt_handler)


def asympt_handler(args: argparse.Namespace) -> int:
    if args.kind == 'alimit':
        if args.j is None:
            raise DomainError("--kind alimit needs --j")
        payload = {'j': args.j, 'a_limit': a_limit(args.j)}
        if args.n is not None:
            payload['subtree_count_limit'] = subtree_count_limit(args.n, args.j)
        return emit(payload)
    if args.n is None:
        raise DomainError(f"--kind {args.kind} needs --n")
    if args.kind == 'var':
        return emit({'n': args.n, 'value': var_d_approx(args.n)})
    if args.kind == 'moment':
        result = moment_expansion(args.k, args.n, args.N)
    else:
        expansion = {'ed': ed_expansion, 'el': el_expansion, 'length': length_expansion}[args.kind]
        result = expansion(args.n, args.N, dps=args.dps)
    return emit(result.to_dict())
