"""simulate subcommand: seeded Monte Carlo runs"""
import argparse

from commands.common import emit, float_list
from config import Config
from models.simulation import SimConfig, SimMode
from services.simulate import run


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser('simulate', help='Monte Carlo for chains, trees and clades')
    parser.add_argument('--n', type=int, required=True)
    parser.add_argument('--samples', type=int, required=True)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--streams', type=int, default=None,
                        help=f'independent substreams (default {Config.SIM_STREAMS})')
    parser.add_argument('--mode', choices=[m.value for m in SimMode], default=SimMode.CHAIN.value)
    parser.add_argument('--t', type=float, default=1.0, help='time for clade_fraction')
    parser.add_argument('--x-grid', type=float_list, default=[1.0],
                        help='thresholds x of Pr(D_n > x log n), comma separated')
    parser.add_argument('--powers', type=float_list, default=[1.0, 1.5, 2.0],
                        help='moments E[(K/n)^s] for clade_fraction, comma separated')
    parser.add_argument('--dump', default=None, help='CSV path for the raw samples')
    parser.set_defaults(handler=simulate_handler)


def simulate_handler(args: argparse.Namespace) -> int:
    streams = args.streams if args.streams is not None else min(Config.SIM_STREAMS, args.samples)
    config = SimConfig(
        n=args.n,
        samples=args.samples,
        seed=args.seed,
        mode=SimMode(args.mode),
        t=args.t,
        streams=streams,
        x_grid=tuple(args.x_grid),
        powers=tuple(args.powers),
    )
    return emit(run(config, threads=args.threads, dump=args.dump).to_dict())
