# Runtime configuration for the beta-splitting toolkit
import logging
import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


def _int(name: str, default: int) -> int:
    return int(float(os.environ.get(name, default)))


def _float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


class Config:
    """Numerical budgets, tolerances and defaults"""

    LOGGING_LEVEL = os.environ.get('LOGGING_LEVEL', 'INFO')
    THREADS = _int('BETASPLIT_THREADS', os.cpu_count() or 1)
    REPORT_DIR = os.environ.get('REPORT_DIR', 'reports')

    # specfun
    HARMONIC_TABLE_CUTOFF = _int('HARMONIC_TABLE_CUTOFF', 100_000)
    PSI_SWITCH_RADIUS = _float('PSI_SWITCH_RADIUS', 16.0)
    POLE_TOLERANCE = _float('POLE_TOLERANCE', 1e-12)
    ROOT_TOLERANCE = _float('ROOT_TOLERANCE', 1e-12)
    DEFAULT_ROOT_COUNT = _int('DEFAULT_ROOT_COUNT', 8)

    # hd_exact
    MEANS_NMAX = _int('MEANS_NMAX', 20_000)
    OCCUPANCY_NMAX = _int('OCCUPANCY_NMAX', 5_000)
    HOP_PMF_NMAX = _int('HOP_PMF_NMAX', 2_000)
    MOMENT_KMAX = _int('MOMENT_KMAX', 6)
    TABLE_BUDGET = _float('TABLE_BUDGET', 2.4e9)
    ALT_SUM_NMAX = _int('ALT_SUM_NMAX', 200)
    MAX_WORKING_DPS = _int('MAX_WORKING_DPS', 400)
    SURVIVAL_NMAX = _int('SURVIVAL_NMAX', 500)

    # asympt
    DEFAULT_POLE_COUNT = _int('DEFAULT_POLE_COUNT', 2)

    # mellin
    CONTOUR_TAIL_CUTOFF = _float('CONTOUR_TAIL_CUTOFF', 1e4)
    CONTOUR_ABS_TOL = _float('CONTOUR_ABS_TOL', 1e-10)
    CONTOUR_MAX_PANELS = _int('CONTOUR_MAX_PANELS', 4_000)
    GAUSS_ORDER = _int('GAUSS_ORDER', 20)
    SERIES_FALLBACK_RADIUS = _float('SERIES_FALLBACK_RADIUS', 1e-3)
    POLE_CLEARANCE = 1e-3

    # simulate
    SIM_HARMONIC_CUTOFF = _int('SIM_HARMONIC_CUTOFF', 100_000)
    SIM_STREAMS = _int('SIM_STREAMS', 16)
    SIM_TREE_CLADE_BUDGET = _int('SIM_TREE_CLADE_BUDGET', 4_000_000)
    PAINTBOX_PROXY_SIZE = _int('PAINTBOX_PROXY_SIZE', 1_000_000)


def configure_logging(level: Optional[str] = None) -> None:
    """Send log records to stderr so stdout stays machine-readable"""
    logging.basicConfig(
        level=(level or Config.LOGGING_LEVEL).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
