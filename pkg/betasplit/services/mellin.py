"""
Mellin Transform Service
Closed-form Mellin transforms, the density expansion of the split
measure, and Parseval line integrals evaluated on vertical contours as
an independent oracle for the exact tables.
"""
import logging
import math
from enum import Enum
from typing import Any, Callable, Optional, Tuple

import numpy as np

from config import Config
from errors import (
    DomainError,
    InsufficientRootsError,
    PoleArgumentError,
    PoleProximityError,
)
from models.expansions import (
    ContourSpec,
    DensityExpansion,
    LineIntegralResult,
    MomentDensityExpansion,
)
from models.tables import RootTable
from services.laurent import TruncatedLaurentSeries
from services.mgf_ldp import mgf_approx, sigma_star
from services.quadrature import integrate_half_line
from services.specfun import (
    CONSTANTS,
    EULER_GAMMA,
    default_root_table,
    digamma,
    harmonic,
    log_gamma,
    polygamma,
    psi_roots,
    psi_taylor,
)

logger = logging.getLogger(__name__)

ZETA2 = CONSTANTS.zeta2
_SERIES_LENGTH = 8
_PRODUCT_CUTOFF = 2000


class LineKind(str, Enum):
    ED = 'ED'
    EL = 'EL'
    ELAMBDA = 'ELambda'
    MOMENTK = 'MomentK'


def _near_nonpositive_integer(s: complex) -> bool:
    tol = Config.POLE_TOLERANCE
    return s.real < 0.5 and abs(s.real - round(s.real)) <= tol and abs(s.imag) <= tol


def mellin_U(s: complex, k: int) -> complex:
    """k! (psi(s) - psi(1))^-k, continued to the whole plane"""
    if k < 1:
        raise DomainError("mellin_U needs k >= 1")
    s = complex(s)
    if _near_nonpositive_integer(s):
        # psi has a pole there, so the transform has a zero
        return 0j
    d = complex(digamma(s)) + EULER_GAMMA
    if abs(d) <= Config.POLE_TOLERANCE * abs(complex(polygamma(1, s))):
        raise PoleArgumentError(f"s={s} is a pole of the Mellin transform")
    return math.factorial(k) / d ** k


def mellin_remainder(s: complex) -> complex:
    """mellin_U(s, 1) - (6/pi^2)/(s-1), regular at s = 1"""
    s = complex(s)
    eps = s - 1.0
    if abs(eps) < Config.SERIES_FALLBACK_RADIUS:
        t = psi_taylor(1.0, _SERIES_LENGTH + 1)
        denominator = TruncatedLaurentSeries(1, t[1:])
        regular = denominator.reciprocal().coefficients[1:]
        return complex(TruncatedLaurentSeries(0, regular).evaluate(eps))
    return mellin_U(s, 1) - 1.0 / (ZETA2 * eps)


def _defect_series(a: float, b: float) -> TruncatedLaurentSeries:
    """Taylor series of (1 - Gamma(a+e)Gamma(b)/(Gamma(a)Gamma(b+e)))/e"""
    ta = psi_taylor(a, _SERIES_LENGTH + 1)
    tb = psi_taylor(b, _SERIES_LENGTH + 1)
    exponent = [0.0] + [(ta[j - 1] - tb[j - 1]) / j for j in range(1, _SERIES_LENGTH + 1)]
    shifted = TruncatedLaurentSeries.taylor(exponent).exp() - 1.0
    return TruncatedLaurentSeries(0, -shifted.coefficients[1:])


def _ratio_defect(eps: complex, a: float, b: float) -> complex:
    if abs(eps) < Config.SERIES_FALLBACK_RADIUS:
        return complex(_defect_series(a, b).evaluate(eps))
    log_ratio = (complex(log_gamma(a + eps)) - complex(log_gamma(a))
                 + complex(log_gamma(b)) - complex(log_gamma(b + eps)))
    return -complex(np.expm1(log_ratio)) / eps


def _check_strip(s: complex) -> complex:
    s = complex(s)
    if s.real <= -1:
        raise DomainError(f"the transform needs Re s > -1, got {s}")
    return s


def mellin_fn(s: complex, n: int) -> complex:
    """Mellin transform of f_n(x) = 1 - (1-x)^(n-1)"""
    s = _check_strip(s)
    if n < 1:
        raise DomainError("mellin_fn needs n >= 1")
    return _ratio_defect(s, 1.0, float(n))


def mellin_Hn(s: complex, n: int) -> complex:
    """Mellin transform of H_n, equal to (h_{n-1} - Mf_n(s))/s"""
    s = _check_strip(s)
    if n < 1:
        raise DomainError("mellin_Hn needs n >= 1")
    if abs(s) < Config.SERIES_FALLBACK_RADIUS:
        series = _defect_series(1.0, float(n))
        tail = TruncatedLaurentSeries(0, -series.coefficients[1:])
        return complex(tail.evaluate(s))
    return (harmonic(n - 1) - mellin_fn(s, n)) / s


def mellin_lambda(s: complex, n: int) -> complex:
    """Mellin transform of lambda_n; s = 1 is a removable singularity"""
    s = _check_strip(s)
    if n < 2:
        raise DomainError("mellin_lambda needs n >= 2")
    return _ratio_defect(s - 1.0, 2.0, float(n + 1))


def density_expansion(N: int, roots: Optional[RootTable] = None) -> DensityExpansion:
    roots = roots if roots is not None else default_root_table()
    if N < 0 or roots.count < N + 1:
        raise DomainError(f"density expansion with N={N} needs {N + 1} roots")
    terms = [(roots.abs_root(i), 1.0 / float(polygamma(1, roots.root(i))))
             for i in range(1, N + 1)]
    return DensityExpansion(N=N, main_coeff=1.0 / ZETA2, pole_terms=terms,
                            remainder_order=roots.abs_root(N + 1))


def density_u(x: float, N: int, roots: Optional[RootTable] = None) -> tuple:
    """Density of the split measure near 0, with the order of the remainder"""
    expansion = density_expansion(N, roots)
    return expansion.evaluate(x), expansion.remainder_order


def _log_power_coefficients(p: float, k: int) -> Tuple[float, ...]:
    """Residue of x^-s mellin_U(s, k) at the order-k pole p, as a polynomial in -log x"""
    t = psi_taylor(p, k + 3)
    series = TruncatedLaurentSeries(1, t[1:]).reciprocal() ** k * math.factorial(k)
    return tuple(series.coefficient(-m).real / math.factorial(m - 1) for m in range(1, k + 1))


def moment_density_expansion(k: int, N: int,
                             roots: Optional[RootTable] = None) -> MomentDensityExpansion:
    if not 1 <= k <= Config.MOMENT_KMAX:
        raise DomainError(f"moment order must lie in 1..{Config.MOMENT_KMAX}")
    roots = roots if roots is not None else default_root_table()
    if N < 0:
        raise DomainError("pole count N must be >= 0")
    if roots.count < N + 1:
        raise InsufficientRootsError(f"{N} poles need {N + 1} roots, table holds {roots.count}")
    terms = [(roots.abs_root(i), _log_power_coefficients(roots.root(i), k))
             for i in range(1, N + 1)]
    return MomentDensityExpansion(k=k, N=N, main_poly=_log_power_coefficients(1.0, k),
                                  pole_terms=terms, remainder_order=roots.abs_root(N + 1))


def moment_density(x: float, k: int, N: int,
                   roots: Optional[RootTable] = None) -> Tuple[float, float]:
    """Density of the k-th moment measure near 0, with the order of the remainder"""
    expansion = moment_density_expansion(k, N, roots)
    return expansion.evaluate(x), expansion.remainder_order


def transform_integrand(kind: str, n: int) -> Callable[[float], float]:
    """The function whose Mellin transform mellin_fn, mellin_Hn or mellin_lambda returns"""
    if kind == 'f':
        return lambda x: 1.0 - (1.0 - x) ** (n - 1)
    if kind == 'H':
        h = [harmonic(j) for j in range(n)]
        weights = [h[j] * math.comb(n - 1, j) for j in range(n)]
        return lambda x: sum(w * x ** j * (1.0 - x) ** (n - 1 - j) for j, w in enumerate(weights))
    if kind == 'lambda':
        return lambda x: (1.0 - (1.0 - x) ** n - n * x * (1.0 - x) ** (n - 1)) / x
    raise DomainError(f"unknown transform kind {kind!r}")


def _beta(s: np.ndarray, n: int) -> np.ndarray:
    """Gamma(s)Gamma(n)/Gamma(n+s) on complex arrays"""
    log_gamma_n = float(log_gamma(float(n)).real)
    if n <= _PRODUCT_CUTOFF:
        log_den = np.log(s[:, None] + np.arange(n)[None, :]).sum(axis=1)
    else:
        log_den = log_gamma(s + n) - log_gamma(s)
    return np.exp(log_gamma_n - log_den)


def _denominator(s: np.ndarray) -> np.ndarray:
    return digamma(1.0 - s) + EULER_GAMMA


def _line_integrand(kind: LineKind, n: int, k: int, sigma: float) -> Callable[[np.ndarray], Any]:
    weight = math.factorial(k)

    def integrand(tau: np.ndarray) -> np.ndarray:
        s = sigma + 1j * np.asarray(tau, dtype=np.float64)
        beta = _beta(s, n)
        d = _denominator(s)
        if kind is LineKind.ED:
            values = -beta / d
        elif kind is LineKind.EL:
            values = beta / (s * d)
        elif kind is LineKind.ELAMBDA:
            values = -(s * n * beta) / ((s - 1.0) * d)
        else:
            values = -weight * beta / d ** k
        return values.real / math.pi

    return integrand


def _check_abscissa(sigma: float, low: float, high: float) -> None:
    if not low < sigma < high:
        raise DomainError(f"sigma={sigma} outside ({low}, {high})")
    if min(sigma - low, high - sigma) < Config.POLE_CLEARANCE:
        raise PoleProximityError(f"sigma={sigma} within {Config.POLE_CLEARANCE} of a pole")


def evaluate_line(kind: str, n: int, k: int = 1,
                  spec: Optional[ContourSpec] = None) -> LineIntegralResult:
    """Parseval line integral for E[D_n], E[L_n], E[Lambda_n] or E[D_n^k]"""
    kind = LineKind(kind)
    spec = spec if spec is not None else ContourSpec.with_defaults(-0.5)
    if n < 2:
        raise DomainError("line integrals need n >= 2")
    if kind is LineKind.MOMENTK and not 1 <= k <= Config.MOMENT_KMAX:
        raise DomainError(f"moment order must lie in 1..{Config.MOMENT_KMAX}")
    _check_abscissa(spec.sigma, -1.0, 0.0)
    order = k if kind is LineKind.MOMENTK else 1
    result = integrate_half_line(_line_integrand(kind, n, order, spec.sigma),
                                 cutoff=spec.tail_cutoff, abs_tol=spec.abs_tol,
                                 max_panels=spec.max_panels)
    return LineIntegralResult(value=result.value, est_error=result.est_error,
                              panels=result.panels, tail_value=result.tail_value,
                              tail_bound=result.tail_bound)


def line_expectation(kind: str, n: int, k: int = 1, spec: Optional[ContourSpec] = None) -> float:
    return evaluate_line(kind, n, k, spec).value


def evaluate_line_mgf(n: int, z: float, spec: Optional[ContourSpec] = None) -> LineIntegralResult:
    """Residue term at -rho(z) plus the remainder integral right of it"""
    if z >= 1:
        raise DomainError(f"the MGF of D_n diverges for z >= 1 (z={z})")
    if n < 2:
        raise DomainError("line_mgf needs n >= 2")
    spec = spec if spec is not None else ContourSpec.with_defaults(sigma_star())
    upper = 1.0 - psi_roots(z - EULER_GAMMA, 1).root(1)
    _check_abscissa(spec.sigma, 1.0, upper)
    residue_term, _ = mgf_approx(n, z)
    if z == 0:
        return LineIntegralResult(value=residue_term, est_error=0.0, panels=0,
                                  residue_term=residue_term)
    sigma = spec.sigma

    def integrand(tau: np.ndarray) -> np.ndarray:
        s = sigma + 1j * np.asarray(tau, dtype=np.float64)
        return (-z * _beta(s, n) / (_denominator(s) - z)).real / math.pi

    result = integrate_half_line(integrand, cutoff=spec.tail_cutoff, abs_tol=spec.abs_tol,
                                 max_panels=spec.max_panels)
    return LineIntegralResult(value=residue_term + result.value, est_error=result.est_error,
                              panels=result.panels, tail_value=result.tail_value,
                              tail_bound=result.tail_bound, residue_term=residue_term)


def line_mgf(n: int, z: float, spec: Optional[ContourSpec] = None) -> float:
    return evaluate_line_mgf(n, z, spec).value
