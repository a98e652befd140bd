"""
Special Functions Service
Harmonic numbers, log-gamma, digamma and polygamma on real and complex
arguments, stable gamma ratios, and the root solver for psi(s) = a.
"""
import logging
import math
from functools import lru_cache
from typing import Any, List, Tuple

import numpy as np
from scipy.optimize import brentq

from config import Config
from errors import (
    DomainError,
    NumericalContractError,
    PoleArgumentError,
    UnsupportedOrderError,
)
from models.tables import ConstantBundle, RootTable

logger = logging.getLogger(__name__)

EULER_GAMMA = 0.57721566490153286061
ZETA3 = 1.2020569031595942853997
BERNOULLI_EVEN = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

CONSTANTS = ConstantBundle(
    euler_gamma=EULER_GAMMA,
    zeta2=math.pi ** 2 / 6,
    zeta3=ZETA3,
    zeta4=math.pi ** 4 / 90,
    bernoulli_even=BERNOULLI_EVEN,
)


@lru_cache(maxsize=1)
def _harmonic_table() -> np.ndarray:
    terms = 1.0 / np.arange(1, Config.HARMONIC_TABLE_CUTOFF + 1, dtype=np.longdouble)
    table = np.concatenate(([0.0], np.cumsum(terms))).astype(np.float64)
    table.setflags(write=False)
    return table


def harmonic(n: Any) -> Any:
    """h_n = sum_{i<=n} 1/i; arrays are evaluated elementwise"""
    table = _harmonic_table()
    values = np.asarray(n)
    if values.ndim == 0:
        m = int(values)
        if m < 0:
            raise DomainError(f"harmonic number of negative order {m}")
        if m < table.size:
            return float(table[m])
        return float(digamma(m + 1.0)) + EULER_GAMMA
    if values.size and values.min() < 0:
        raise DomainError("harmonic number of negative order")
    m = values.astype(np.int64)
    inside = m < table.size
    out = np.empty(m.shape, dtype=np.float64)
    out[inside] = table[m[inside]]
    if not inside.all():
        out[~inside] = digamma(m[~inside] + 1.0) + EULER_GAMMA
    return out


def _prepare(s: Any) -> Tuple[np.ndarray, bool, bool]:
    real_input = not np.iscomplexobj(s)
    arr = np.atleast_1d(np.asarray(s, dtype=np.float64 if real_input else np.complex128))
    return arr, np.ndim(s) == 0, real_input


def _finish(values: np.ndarray, scalar: bool) -> Any:
    return values[0].item() if scalar else values


def _pole_check(arr: np.ndarray) -> None:
    tol = Config.POLE_TOLERANCE
    re, im = np.real(arr), np.imag(arr)
    near = (re < 0.5) & (np.abs(re - np.round(re)) <= tol) & (np.abs(im) <= tol)
    if np.any(near):
        raise PoleArgumentError(f"argument at a pole of the gamma function: {arr[near][0]}")


def _switch_radius(order: int) -> float:
    # the asymptotic series needs a larger radius for higher derivatives
    return Config.PSI_SWITCH_RADIUS + 4.0 * max(0, order - 3)


def _lift_counts(arr: np.ndarray, radius: float) -> np.ndarray:
    re, im = np.real(arr), np.abs(np.imag(arr))
    to_radius = np.sqrt(np.maximum(radius ** 2 - im ** 2, 0.0)) - re
    shift = np.maximum(np.maximum(to_radius, -re), 0.0)
    return np.ceil(shift).astype(np.int64)


def _asymptotic_polygamma(order: int, w: np.ndarray) -> np.ndarray:
    # series in inverse powers of w: large |w| underflows the tail instead of overflowing
    inverse = 1.0 / w
    inverse2 = inverse * inverse
    if order == 0:
        total = np.log(w) - 0.5 * inverse
        power = inverse2
        for k, b in enumerate(BERNOULLI_EVEN, start=1):
            total = total - b / (2 * k) * power
            power = power * inverse2
        return total
    lead = inverse ** order
    total = math.factorial(order - 1) * lead + math.factorial(order) / 2 * lead * inverse
    power = lead * inverse2
    for k, b in enumerate(BERNOULLI_EVEN, start=1):
        total = total + b * math.factorial(2 * k + order - 1) / math.factorial(2 * k) * power
        power = power * inverse2
    return total if order % 2 == 1 else -total


def _polygamma(order: int, s: Any) -> Any:
    arr, scalar, _ = _prepare(s)
    _pole_check(arr)
    lifts = _lift_counts(arr, _switch_radius(order))
    correction = np.zeros_like(arr)
    for k in range(int(lifts.max(initial=0))):
        active = lifts > k
        term = np.zeros_like(arr)
        np.power(arr + k, -(order + 1), out=term, where=active)
        correction += term
    sign = -1.0 if order % 2 == 0 else 1.0
    values = _asymptotic_polygamma(order, arr + lifts) + sign * math.factorial(order) * correction
    return _finish(values, scalar)


def digamma(s: Any) -> Any:
    """psi(s) by upward recurrence to the switch radius, then the asymptotic series"""
    return _polygamma(0, s)


def polygamma(k: int, s: Any) -> Any:
    if k not in (0, 1, 2, 3):
        raise UnsupportedOrderError(f"polygamma order {k} is not supported (0..3)")
    return _polygamma(k, s)


def psi_taylor(x: float, length: int) -> np.ndarray:
    """Taylor coefficients psi^(j)(x)/j! for j = 0..length-1 at a real point"""
    return np.array([_polygamma(j, float(x)) / math.factorial(j) for j in range(length)])


def _continuous_log(z: np.ndarray) -> np.ndarray:
    # arguments left of the imaginary axis take arg in (pi/2, 3pi/2)
    angle = np.angle(z)
    angle = np.where(np.real(z) < 0, np.mod(angle, 2 * np.pi), angle)
    return np.log(np.abs(z)) + 1j * angle


def log_gamma(s: Any) -> Any:
    """A branch of log Gamma continuous along vertical lines"""
    arr, scalar, _ = _prepare(s)
    arr = arr.astype(np.complex128)
    _pole_check(arr)
    lifts = _lift_counts(arr, Config.PSI_SWITCH_RADIUS)
    correction = np.zeros_like(arr)
    for k in range(int(lifts.max(initial=0))):
        active = lifts > k
        correction += np.where(active, _continuous_log(np.where(active, arr + k, 1.0)), 0.0)
    w = arr + lifts
    series = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI
    inverse = 1.0 / w
    inverse2 = inverse * inverse
    power = inverse
    for k, b in enumerate(BERNOULLI_EVEN, start=1):
        series = series + b / (2 * k * (2 * k - 1)) * power
        power = power * inverse2
    return _finish(series - correction, scalar)


def gamma(s: Any) -> Any:
    values = np.exp(np.atleast_1d(log_gamma(s)))
    if not np.iscomplexobj(s):
        values = values.real
    return _finish(values, np.ndim(s) == 0)


def gamma_ratio(n: float, b: float) -> float:
    """Gamma(n)/Gamma(n+b) without forming either gamma value"""
    if n <= 0 or n + b <= 0:
        raise DomainError(f"gamma_ratio needs n > 0 and n + b > 0, got n={n}, b={b}")
    if b == 0:
        return 1.0
    lift = max(0, math.ceil(Config.PSI_SWITCH_RADIUS - min(n, n + b)))
    log_ratio = sum(math.log1p(b / (n + k)) for k in range(lift))
    x = float(n + lift)
    log_ratio += -b * math.log(x) - (x + b - 0.5) * math.log1p(b / x) + b
    for k, bern in enumerate(BERNOULLI_EVEN, start=1):
        coeff = bern / (2 * k * (2 * k - 1))
        log_ratio += coeff * (x ** (1 - 2 * k) - (x + b) ** (1 - 2 * k))
    return math.exp(log_ratio)


def _refine_root(a: float, lo: float, hi: float) -> Tuple[float, Tuple[float, float]]:
    """Bisection to width 1e-3, then Brent's method inside the bracket"""
    def f(x: float) -> float:
        return float(digamma(x)) - a

    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    bracket = (lo, hi)
    x, info = brentq(f, lo, hi, xtol=1e-15, maxiter=200, full_output=True, disp=False)
    logger.debug("psi root %.15g after %d Brent iterations", x, info.iterations)
    # the residual cannot beat psi'(x) times the float spacing at x
    limit = max(Config.ROOT_TOLERANCE, 16 * float(_polygamma(1, x)) * float(np.spacing(abs(x))))
    if abs(f(x)) > limit:
        raise NumericalContractError(f"psi root near {x:.15g} missed tolerance: "
                                     f"residual {f(x):.3e}")
    return x, bracket


def _negative_root(a: float, index: int) -> Tuple[float, Tuple[float, float]]:
    gap = 1e-6
    lo, hi = -index + gap, -index + 1 - gap
    while float(digamma(lo)) > a or float(digamma(hi)) < a:
        gap *= 1e-2
        lo, hi = -index + gap, -index + 1 - gap
    return _refine_root(a, lo, hi)


def _positive_root(a: float) -> float:
    if abs(a + EULER_GAMMA) <= 4e-16:
        return 1.0
    lo, hi = 1.0, 1.0
    while float(digamma(lo)) > a:
        lo *= 0.5
    while float(digamma(hi)) < a:
        hi *= 2.0
    if lo == hi:
        return 1.0
    return _refine_root(a, lo, hi)[0]


def psi_roots(a: float, count: int) -> RootTable:
    """The positive root and the first `count` negative roots of psi(s) = a"""
    if count < 1:
        raise DomainError("count must be >= 1")
    roots: List[Tuple[int, float]] = []
    brackets: List[Tuple[float, float]] = []
    for i in range(1, count + 1):
        root, bracket = _negative_root(a, i)
        roots.append((i, root))
        brackets.append(bracket)
    return RootTable(
        target=a,
        roots=tuple(roots),
        positive_root=_positive_root(a),
        brackets=tuple(brackets),
    )


@lru_cache(maxsize=4)
def default_root_table(count: int = Config.DEFAULT_ROOT_COUNT) -> RootTable:
    """Roots of psi(s) = psi(1), shared by the expansion evaluators"""
    return psi_roots(-EULER_GAMMA, count)
