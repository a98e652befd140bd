"""exact subcommand: recurrence tables for small and moderate n"""
import argparse
import sys

from commands.common import add_format_flag, emit
from errors import DomainError
from services.hd_exact import build_exact_tables, height_survival


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('exact', help='exact moment, hop and length tables')
    parser.add_argument('--nmax', type=int, required=True)
    parser.add_argument('--kmax', type=int, default=2)
    parser.add_argument('--occupancy-nmax', type=int, default=None,
                        help='rows of the a(n, j) triangle to include')
    parser.add_argument('--tail-n', type=int, default=None,
                        help='leaf count for the height tail Pr(D_n > t)')
    parser.add_argument('--tail-t', type=float, action='append', default=None,
                        help='time point of the height tail; repeat for several')
    add_format_flag(parser)
    parser.set_defaults(handler=exact_handler)


def exact_handler(args: argparse.Namespace) -> int:
    tables = build_exact_tables(args.nmax, args.kmax, args.occupancy_nmax)
    if args.format == 'csv':
        sys.stdout.write(tables.to_csv())
        return 0
    payload = tables.to_dict()
    if tables.occupancy is not None:
        payload['occupancy'] = [tables.occupancy[n, 1:n + 1].tolist()
                                for n in range(1, tables.occupancy_nmax + 1)]
    if args.tail_n is not None:
        if not args.tail_t:
            raise DomainError("--tail-n needs at least one --tail-t")
        survival = height_survival(args.tail_n, args.tail_t)
        payload['height_tail'] = [{'t': t, 'survival': float(p)}
                                  for t, p in zip(args.tail_t, survival)]
    return emit(payload)
