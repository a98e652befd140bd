"""mellin / mgf subcommands: line integrals on vertical contours"""
import argparse

import pandas as pd

from commands.common import add_format_flag, emit, emit_frame
from config import Config
from models.expansions import ContourSpec
from services.hd_exact import mgf_exact
from services.mellin import LineKind, evaluate_line, evaluate_line_mgf
from services.mgf_ldp import mgf_approx, rho, sigma_star


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('mellin', help='Parseval line integral for an expectation')
    parser.add_argument('--kind', choices=[k.value for k in LineKind], required=True)
    parser.add_argument('--n', type=int, required=True)
    parser.add_argument('--k', type=int, default=1, help='moment order for MomentK')
    parser.add_argument('--sigma', type=float, default=-0.5, help='contour abscissa in (-1, 0)')
    parser.add_argument('--tail-cutoff', type=float, default=Config.CONTOUR_TAIL_CUTOFF)
    parser.add_argument('--abs-tol', type=float, default=Config.CONTOUR_ABS_TOL)
    parser.set_defaults(handler=mellin_handler)

    mgf = subparsers.add_parser('mgf', help='exact and asymptotic moment generating function')
    mgf.add_argument('--n', type=int, required=True)
    mgf.add_argument('--z', type=float, action='append', required=True,
                     help='evaluation point below 1; repeat for several')
    mgf.add_argument('--line', action='store_true', help='also evaluate the line integral')
    add_format_flag(mgf)
    mgf.set_defaults(handler=mgf_handler)


def mellin_handler(args: argparse.Namespace) -> int:
    spec = ContourSpec(sigma=args.sigma, tail_cutoff=args.tail_cutoff, abs_tol=args.abs_tol)
    result = evaluate_line(args.kind, args.n, args.k, spec)
    payload = result.to_dict()
    payload.update({'kind': args.kind, 'n': args.n, 'k': args.k, 'sigma': args.sigma})
    return emit(payload)


def mgf_handler(args: argparse.Namespace) -> int:
    records = []
    for z in args.z:
        approx, order = mgf_approx(args.n, z)
        exact = mgf_exact(args.n, z)
        record = {
            'n': args.n,
            'z': z,
            'rho': rho(z),
            'exact': exact,
            'approx': approx,
            'ratio': exact / approx,
            'rel_error_order': order,
        }
        if args.line:
            record['line'] = evaluate_line_mgf(args.n, z,
                                               ContourSpec.with_defaults(sigma_star())).value
        records.append(record)
    frame = pd.DataFrame.from_records(records)
    if args.format == 'csv':
        return emit_frame(frame, 'csv')
    return emit({'n': args.n, 'rows': records})
