"""Shared helpers for the subcommand registrars"""
import argparse
import sys
from typing import Any, Callable, List

import pandas as pd

from services.report_generator import to_json

Handler = Callable[[argparse.Namespace], int]


def emit(payload: Any) -> int:
    """Print a JSON payload on stdout; logs stay on stderr"""
    sys.stdout.write(to_json(payload))
    sys.stdout.write('\n')
    return 0


def emit_frame(frame: pd.DataFrame, fmt: str) -> int:
    if fmt == 'csv':
        sys.stdout.write(frame.to_csv(index=False, float_format='%.15g'))
        return 0
    return emit(frame.to_dict(orient='records'))


def float_list(text: str) -> List[float]:
    """Comma separated floats, e.g. '0.5,1,1.5'"""
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--format', choices=('json', 'csv'), default='json',
                        help='output format (default json)')
