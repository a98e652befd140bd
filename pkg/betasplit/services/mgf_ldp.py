"""
MGF and Large Deviations Service
Inverse rho of psi(1+.) - psi(1), the asymptotic MGF of D_n, the CLT
parameters and the Legendre rate function of D_n/log n.
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Tuple

from scipy.optimize import brentq

from config import Config
from errors import DomainError, NumericalContractError
from models.expansions import RateFunctionSample, TailRegime
from services.specfun import (
    CONSTANTS,
    EULER_GAMMA,
    digamma,
    gamma,
    gamma_ratio,
    polygamma,
    psi_roots,
)

logger = logging.getLogger(__name__)

ZETA2 = CONSTANTS.zeta2
ZETA3 = CONSTANTS.zeta3
X_ZERO = 1 / ZETA2
X_ONE = 1 / (ZETA2 - 1)
# below this x the maximiser of the rate function follows psi'(w) = 1/w^2 + zeta2
SMALL_X = 1e-20


def x_zero() -> float:
    """Law-of-large-numbers point of D_n/log n"""
    return X_ZERO


def x_one() -> float:
    """Beyond this point the rate function is linear"""
    return X_ONE


def _g(r: float) -> float:
    return float(digamma(1.0 + r)) + EULER_GAMMA


def rho(z: float) -> float:
    """The unique rho in (-1, 1) with psi(1+rho) - psi(1) = z"""
    if z >= 1:
        raise DomainError(f"rho is defined for z < 1, got {z}")
    if z == 0:
        return 0.0
    # psi(w) <= psi(2) - 1/w on (0, 1], so g(z/(1-z)) <= z brackets negative z
    r = brentq(lambda x: _g(x) - z, min(0.0, z / (1.0 - z)), 1.0, xtol=1e-15, maxiter=200)
    residual = abs(_g(r) - z)
    if residual > Config.ROOT_TOLERANCE * max(1.0, abs(z)):
        raise NumericalContractError(f"rho({z}) residual {residual:.3e}")
    return r


@lru_cache(maxsize=1)
def sigma_star() -> float:
    """Contour abscissa 1 + |s_1(psi(2))| for the MGF line integral"""
    return 1.0 - psi_roots(1.0 - EULER_GAMMA, 1).root(1)


def mgf_approx(n: int, z: float) -> Tuple[float, float]:
    """Leading term of E exp(z D_n) and the exponent of its relative error"""
    if z >= 1:
        raise DomainError(f"the MGF of D_n diverges for z >= 1 (z={z})")
    if n < 2:
        raise DomainError("mgf_approx needs n >= 2")
    r = rho(z)
    if z == 0:
        value = 1.0
    else:
        # -z Gamma(-rho) = (z/rho) Gamma(1-rho), finite as z -> 0
        prefactor = (z / r) * float(gamma(1.0 - r)) / float(polygamma(1, 1.0 + r))
        value = prefactor * gamma_ratio(n, -r)
    return value, -min(1.0, sigma_star() + r)


def _richardson_derivatives(f: Callable[[float], float], step: float) -> Tuple[float, float]:
    def central(h: float) -> Tuple[float, float]:
        up, down, mid = f(h), f(-h), f(0.0)
        return (up - down) / (2 * h), (up - 2 * mid + down) / (h * h)

    d1_h, d2_h = central(step)
    d1_half, d2_half = central(step / 2)
    return (4 * d1_half - d1_h) / 3, (4 * d2_half - d2_h) / 3


def clt_params() -> Tuple[float, float]:
    """Mean and variance coefficients of D_n on the log n scale"""
    mu = 1 / ZETA2
    sigma2 = 2 * ZETA3 / ZETA2 ** 3
    d1, d2 = _richardson_derivatives(rho, 1e-2)
    if abs(d1 - mu) > 1e-6 or abs(d2 - sigma2) > 1e-6:
        raise NumericalContractError(
            f"rho derivatives ({d1:.9f}, {d2:.9f}) disagree with ({mu:.9f}, {sigma2:.9f})")
    return mu, sigma2


def rate_function(x: float) -> RateFunctionSample:
    """
    Legendre transform of rho evaluated at x
    The maximiser is solved for in w = 1 + rho_hat so that small x keeps its
    precision; below SMALL_X the two-term expansion psi'(w) = 1/w^2 + zeta2
    is used. At x = 0, and wherever sqrt(x) falls below the float spacing
    at -1, rho_hat takes its limiting value -1.
    """
    if x < 0:
        return RateFunctionSample(x=x, rho_hat=-1.0, lambda_star=math.inf, derivative=-math.inf)
    if x == 0:
        return RateFunctionSample(x=0.0, rho_hat=-1.0, lambda_star=1.0, derivative=-math.inf)
    if x >= X_ONE:
        return RateFunctionSample(x=x, rho_hat=1.0, lambda_star=x - 1.0, derivative=1.0)
    if x < SMALL_X:
        w = math.sqrt(x / (1.0 - ZETA2 * x))
        g = -1.0 / w + ZETA2 * w
    else:
        target = 1.0 / x
        # psi'(w) > 1/w^2 keeps the lower end above target
        lo = min(1.0, 0.5 / math.sqrt(target))
        w = brentq(lambda v: float(polygamma(1, v)) - target, lo, 2.0,
                   xtol=1e-15 * lo, rtol=1e-15, maxiter=200)
        g = float(digamma(w)) + EULER_GAMMA
    r = w - 1.0
    return RateFunctionSample(x=x, rho_hat=r, lambda_star=x * g - r, derivative=g)


def tail_regime(x: float) -> TailRegime:
    if x <= 0:
        raise DomainError("tail regimes are defined for x > 0")
    if x <= X_ZERO:
        return TailRegime.LOWER_EXACT
    if x < X_ONE:
        return TailRegime.UPPER_EXACT
    return TailRegime.UPPER_BOUND_ONLY


def tail_exponent(x: float) -> Tuple[float, TailRegime]:
    """Exponent of Pr(D_n ~ x log n) on the n scale, with its regime label"""
    return rate_function(x).lambda_star, tail_regime(x)
