"""
Adaptive Gauss-Legendre panels on a half line.
The finite part [0, T] and the mapped tail tau = T/u, u in (0, 1], share
one refinement heap, so panels are always split where the estimated
error is largest.
"""
import heapq
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Tuple

import numpy as np

from config import Config
from errors import QuadratureNonConvergenceError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=8)
def _gauss_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


@dataclass
class _Panel:
    region: int  # 0 finite part, 1 mapped tail
    a: float
    b: float
    value: float
    error: float


@dataclass
class HalfLineIntegral:
    value: float
    est_error: float
    panels: int
    tail_value: float
    tail_bound: float


def _gauss(func: Integrand, a: float, b: float, order: int) -> float:
    nodes, weights = _gauss_rule(order)
    half = 0.5 * (b - a)
    x = a + half * (nodes + 1.0)
    return float(half * np.dot(weights, func(x)))


def _evaluate_panel(func: Integrand, region: int, a: float, b: float, order: int) -> _Panel:
    whole = _gauss(func, a, b, order)
    mid = 0.5 * (a + b)
    halves = _gauss(func, a, mid, order) + _gauss(func, mid, b, order)
    return _Panel(region, a, b, halves, abs(whole - halves))


def integrate_half_line(func: Integrand, cutoff: float = Config.CONTOUR_TAIL_CUTOFF,
                        abs_tol: float = Config.CONTOUR_ABS_TOL,
                        max_panels: int = Config.CONTOUR_MAX_PANELS,
                        order: int = Config.GAUSS_ORDER) -> HalfLineIntegral:
    """Integral of func over [0, inf) for integrands decaying like tau^-2"""

    def tail(u: np.ndarray) -> np.ndarray:
        return func(cutoff / u) * cutoff / (u * u)

    integrands = (func, tail)
    breaks = [0.0, 0.5] + [2.0 ** k for k in range(0, int(math.log2(cutoff)) + 1)] + [cutoff]
    breaks = sorted(set(b for b in breaks if b <= cutoff))
    tail_breaks = [0.0] + [2.0 ** -k for k in (40, 30, 20, 12, 6, 3, 1)] + [1.0]

    panels: List[_Panel] = []
    for region, points in ((0, breaks), (1, tail_breaks)):
        for a, b in zip(points, points[1:]):
            panels.append(_evaluate_panel(integrands[region], region, a, b, order))

    heap = [(-p.error, idx) for idx, p in enumerate(panels)]
    heapq.heapify(heap)
    active = set(range(len(panels)))
    total_error = sum(p.error for p in panels)
    while total_error > abs_tol:
        if len(active) >= max_panels:
            raise QuadratureNonConvergenceError(
                f"{len(active)} panels reached with estimated error {total_error:.3e}")
        _, idx = heapq.heappop(heap)
        worst = panels[idx]
        active.remove(idx)
        mid = 0.5 * (worst.a + worst.b)
        for a, b in ((worst.a, mid), (mid, worst.b)):
            child = _evaluate_panel(integrands[worst.region], worst.region, a, b, order)
            panels.append(child)
            active.add(len(panels) - 1)
            heapq.heappush(heap, (-child.error, len(panels) - 1))
        total_error = sum(panels[i].error for i in active)

    # fixed summation order keeps results reproducible
    ordered = sorted((panels[i] for i in active), key=lambda p: (p.region, p.a))
    value = math.fsum(p.value for p in ordered)
    tail_value = math.fsum(p.value for p in ordered if p.region == 1)
    est_error = math.fsum(p.error for p in ordered)

    plateau = float(np.max(np.abs(func(np.array([0.5 * cutoff, cutoff])))
                           * np.array([0.5 * cutoff, cutoff]) ** 2))
    tail_bound = plateau / cutoff
    if abs(tail_value) > 10.0 * tail_bound + abs_tol:
        logger.warning("tail %.3e exceeds its tau^-2 envelope bound %.3e", tail_value, tail_bound)
    logger.debug("half-line quadrature: %d panels, error %.2e", len(ordered), est_error)
    return HalfLineIntegral(value=value, est_error=est_error, panels=len(ordered),
                            tail_value=tail_value, tail_bound=tail_bound)
