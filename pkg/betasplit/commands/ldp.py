"""ldp subcommand: the rate function on a grid"""
import argparse

import numpy as np
import pandas as pd

from commands.common import add_format_flag, emit_frame
from errors import DomainError
from services.mgf_ldp import rate_function, tail_regime


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('ldp', help='large-deviation rate function of D_n/log n')
    parser.add_argument('--x-min', type=float, default=0.05)
    parser.add_argument('--x-max', type=float, default=3.0)
    parser.add_argument('--step', type=float, default=0.05)
    add_format_flag(parser)
    parser.set_defaults(handler=ldp_handler)


def ldp_handler(args: argparse.Namespace) -> int:
    if args.step <= 0 or args.x_max < args.x_min:
        raise DomainError("need step > 0 and x-max >= x-min")
    count = int(round((args.x_max - args.x_min) / args.step)) + 1
    records = []
    for x in np.linspace(args.x_min, args.x_min + (count - 1) * args.step, count):
        sample = rate_function(float(x)).to_dict()
        sample['regime'] = tail_regime(float(x)).value if x > 0 else 'degenerate'
        records.append(sample)
    return emit_frame(pd.DataFrame.from_records(records), args.format)
