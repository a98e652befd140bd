"""
Asymptotic Expansion Service
Gamma-ratio forms of the expansions for E[D_n], E[L_n] and E[Lambda_n],
the residue engine for general moments E[D_n^k], and the limits of the
occupation probabilities.
"""
import logging
import math
from contextlib import contextmanager
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Tuple

import mpmath

from config import Config
from errors import DomainError, InsufficientRootsError
from models.expansions import AsymptoticValue
from models.tables import RootTable
from services.laurent import TruncatedLaurentSeries
from services.specfun import (
    CONSTANTS,
    EULER_GAMMA,
    default_root_table,
    gamma,
    gamma_ratio,
    harmonic,
    log_gamma,
    polygamma,
    psi_taylor,
)

logger = logging.getLogger(__name__)

ZETA2 = CONSTANTS.zeta2
ZETA3 = CONSTANTS.zeta3


class _DoublePrecision:
    """Expansion arithmetic in machine doubles"""

    def __init__(self, roots: RootTable):
        self.roots = roots
        self.one = 1.0
        self.zeta2 = ZETA2
        self.zeta3 = ZETA3

    def harmonic(self, m: int) -> float:
        return harmonic(m)

    def trigamma(self, x: float) -> float:
        return float(polygamma(1, x))

    def gamma(self, x: float) -> float:
        return float(gamma(x))

    def gamma_ratio(self, n: float, b: float) -> float:
        return gamma_ratio(n, b)

    def root(self, i: int) -> float:
        return self.roots.root(i)


class _HighPrecision:
    """Expansion arithmetic in mpmath at a fixed number of digits"""

    def __init__(self, roots: RootTable, dps: int):
        self.roots = roots
        self.dps = dps
        self.one = mpmath.mpf(1)
        self.zeta2 = mpmath.pi ** 2 / 6
        self.zeta3 = mpmath.zeta(3)

    def harmonic(self, m: int) -> Any:
        return mpmath.harmonic(m)

    def trigamma(self, x: Any) -> Any:
        return mpmath.psi(1, x)

    def gamma(self, x: Any) -> Any:
        return mpmath.gamma(x)

    def gamma_ratio(self, n: Any, b: Any) -> Any:
        return mpmath.exp(mpmath.loggamma(n) - mpmath.loggamma(mpmath.mpf(n) + b))

    def root(self, i: int) -> Any:
        return _mp_root(i, self.roots.root(i), self.dps)


@lru_cache(maxsize=64)
def _mp_root(i: int, start: float, dps: int) -> Any:
    with mpmath.workdps(dps):
        return mpmath.findroot(lambda s: mpmath.digamma(s) - mpmath.digamma(1), mpmath.mpf(start))


@contextmanager
def _arithmetic(roots: RootTable, dps: Optional[int]) -> Iterator[Any]:
    if dps is None:
        yield _DoublePrecision(roots)
        return
    with mpmath.workdps(dps):
        yield _HighPrecision(roots, dps)


def _resolve_roots(n: int, N: int, roots: Optional[RootTable]) -> RootTable:
    if n < 2:
        raise DomainError(f"expansions need n >= 2, got {n}")
    if N < 0:
        raise DomainError("pole count N must be >= 0")
    roots = roots if roots is not None else default_root_table()
    if roots.count < N + 1:
        raise InsufficientRootsError(f"{N} poles need {N + 1} roots, table holds {roots.count}")
    if abs(roots.target + EULER_GAMMA) > 1e-12:
        raise InsufficientRootsError("expansions need the roots of psi(s) = psi(1)")
    return roots


def _finish(terms: List[Tuple[str, Any]], N: int, error_order: float) -> AsymptoticValue:
    value = sum(c for _, c in terms)
    return AsymptoticValue(value=value, terms=terms, pole_count=N, error_order=error_order)


def ed_expansion(n: int, N: int = Config.DEFAULT_POLE_COUNT,
                 roots: Optional[RootTable] = None, dps: Optional[int] = None) -> AsymptoticValue:
    """E[D_n] to N negative-root poles"""
    roots = _resolve_roots(n, N, roots)
    with _arithmetic(roots, dps) as ar:
        h = ar.harmonic(n - 1)
        terms: List[Tuple[str, Any]] = [
            ('main', h / ar.zeta2),
            ('const', ar.zeta3 / ar.zeta2 ** 2),
        ]
        for i in range(1, N + 1):
            p = -ar.root(i)
            coeff = ar.gamma(p + 1) / ar.trigamma(-p)
            terms.append((f'pole{i}', -coeff * ar.gamma_ratio(n, p + 1)))
        return _finish(terms, N, -(1 + roots.abs_root(N + 1)))


def el_expansion(n: int, N: int = Config.DEFAULT_POLE_COUNT,
                 roots: Optional[RootTable] = None, dps: Optional[int] = None) -> AsymptoticValue:
    """E[L_n] to N negative-root poles"""
    roots = _resolve_roots(n, N, roots)
    with _arithmetic(roots, dps) as ar:
        h = ar.harmonic(n - 1)
        c0 = ar.zeta3 / ar.zeta2 ** 2
        terms: List[Tuple[str, Any]] = [
            ('main', h ** 2 / (2 * ar.zeta2)),
            ('log', c0 * h),
            ('const', ar.zeta3 ** 2 / ar.zeta2 ** 3 + ar.one / 10),
            ('trigamma', -ar.trigamma(n) / (2 * ar.zeta2)),
        ]
        for i in range(1, N + 1):
            p = -ar.root(i)
            coeff = ar.gamma(p + 1) / ((p + 1) * ar.trigamma(-p))
            terms.append((f'pole{i}', coeff * ar.gamma_ratio(n, p + 1)))
        return _finish(terms, N, -(1 + roots.abs_root(N + 1)))


def length_expansion(n: int, N: int = Config.DEFAULT_POLE_COUNT,
                     roots: Optional[RootTable] = None,
                     dps: Optional[int] = None) -> AsymptoticValue:
    """E[Lambda_n] to N negative-root poles"""
    roots = _resolve_roots(n, N, roots)
    with _arithmetic(roots, dps) as ar:
        terms: List[Tuple[str, Any]] = [('main', n / ar.zeta2)]
        for i in range(1, N + 1):
            p = -ar.root(i)
            coeff = ar.gamma(p + 2) / (p * ar.trigamma(-p))
            terms.append((f'pole{i}', -coeff * ar.gamma_ratio(n + 1, p)))
        return _finish(terms, N, -roots.abs_root(N + 1))


def _gamma_series(p: float, length: int) -> TruncatedLaurentSeries:
    """Gamma(p + eps); a simple pole when p = 0"""
    t = psi_taylor(1.0 if p == 0 else p, length)
    log_coeffs = [0.0 if p == 0 else float(log_gamma(p).real)]
    log_coeffs += [t[j - 1] / j for j in range(1, length)]
    series = TruncatedLaurentSeries.taylor(log_coeffs).exp()
    return series.shift(-1) if p == 0 else series


def _denominator_series(p: float, length: int) -> TruncatedLaurentSeries:
    """psi(1 - p - eps) - psi(1), whose constant term vanishes at every pole"""
    t = psi_taylor(1.0 - p, length + 1)
    return TruncatedLaurentSeries(1, [t[j] * (-1) ** j for j in range(1, length + 1)])


def _ratio_series(n: int, p: float, length: int) -> TruncatedLaurentSeries:
    """Gamma(n)/Gamma(n + p + eps)"""
    t = psi_taylor(n + p, length)
    exponent = [0.0] + [-t[j - 1] / j for j in range(1, length)]
    return TruncatedLaurentSeries.taylor(exponent).exp() * gamma_ratio(n, p)


def moment_residue(k: int, pole_index: int, n: int, roots: Optional[RootTable] = None) -> float:
    """k! Res Gamma(s) Gamma(n)/Gamma(n+s) (psi(1-s) - psi(1))^-k at s = 1 - s_i"""
    if not 1 <= k <= Config.MOMENT_KMAX:
        raise DomainError(f"moment order must lie in 1..{Config.MOMENT_KMAX}")
    if pole_index < 0 or n < 2:
        raise DomainError("need pole_index >= 0 and n >= 2")
    roots = roots if roots is not None else default_root_table()
    if pole_index > roots.count:
        raise InsufficientRootsError(f"pole {pole_index} beyond root table of {roots.count}")
    p = 0.0 if pole_index == 0 else roots.abs_root(pole_index) + 1.0
    length = k + 3
    series = (_gamma_series(p, length) * _ratio_series(n, p, length)
              * _denominator_series(p, length) ** (-k))
    return math.factorial(k) * series.residue().real


def moment_expansion(k: int, n: int, N: int = Config.DEFAULT_POLE_COUNT,
                     roots: Optional[RootTable] = None) -> AsymptoticValue:
    """E[D_n^k] as the sum of residues at 0 and at the first N poles 1 - s_i"""
    roots = _resolve_roots(n, N, roots)
    terms = [(f'pole{i}', moment_residue(k, i, n, roots)) for i in range(0, N + 1)]
    return _finish(terms, N, -(1 + roots.abs_root(N + 1)))


def var_d_approx(n: int) -> float:
    if n < 2:
        raise DomainError("var_d_approx needs n >= 2")
    return (2 * ZETA3 / ZETA2 ** 3 * harmonic(n - 1)
            + 5 * ZETA3 ** 2 / ZETA2 ** 4 - 18 / (5 * math.pi ** 2))


def a_limit(j: int) -> float:
    """Limit of a(n, j) as n grows"""
    if j < 2:
        raise DomainError("a_limit needs j >= 2")
    return harmonic(j - 1) / (ZETA2 * (j - 1))


def subtree_count_limit(n: int, j: int) -> float:
    """First-order behaviour n a(j)/j of E[N_n(j)]"""
    return n * a_limit(j) / j


def expansion_constants(roots: Optional[RootTable] = None) -> Dict[str, float]:
    roots = roots if roots is not None else default_root_table()
    s1 = roots.abs_root(1)
    return {
        'c0': ZETA3 / ZETA2 ** 2 + EULER_GAMMA / ZETA2,
        'b0': (3 * EULER_GAMMA ** 2 / math.pi ** 2 + ZETA3 / ZETA2 ** 2 * EULER_GAMMA
               + ZETA3 ** 2 / ZETA2 ** 3 + 0.1),
        'pole1_coefficient': -float(gamma(s1 + 1)) / float(polygamma(1, -s1)),
        'mu': 1 / ZETA2,
        'sigma2': 2 * ZETA3 / ZETA2 ** 3,
    }
