import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Tuple

from config import Config
from errors import DomainError


@dataclass
class AsymptoticValue:
    """Partial sum of an asymptotic expansion with its labelled terms"""
    value: Any
    terms: List[Tuple[str, Any]]
    pole_count: int
    error_order: float

    def pole_terms(self) -> List[Any]:
        return [c for label, c in self.terms if label.startswith('pole')]

    def pole_terms_decreasing(self) -> bool:
        magnitudes = [abs(c) for c in self.pole_terms()]
        return all(a > b for a, b in zip(magnitudes, magnitudes[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': float(self.value),
            'terms': [{'label': label, 'contribution': float(c)} for label, c in self.terms],
            'pole_count': self.pole_count,
            'error_order': float(self.error_order),
        }


@dataclass(frozen=True)
class ContourSpec:
    sigma: float
    tail_cutoff: float = Config.CONTOUR_TAIL_CUTOFF
    abs_tol: float = Config.CONTOUR_ABS_TOL
    max_panels: int = Config.CONTOUR_MAX_PANELS

    def __post_init__(self) -> None:
        if self.tail_cutoff < 10:
            raise DomainError(f"tail cutoff must be >= 10, got {self.tail_cutoff}")
        if not 1e-12 <= self.abs_tol <= 1e-4:
            raise DomainError(f"abs_tol must lie in [1e-12, 1e-4], got {self.abs_tol}")
        if self.max_panels < 1:
            raise DomainError("max_panels must be positive")

    @classmethod
    def with_defaults(cls, sigma: float) -> 'ContourSpec':
        return cls(sigma=sigma)


@dataclass
class LineIntegralResult:
    value: float
    est_error: float
    panels: int
    tail_value: float = 0.0
    tail_bound: float = 0.0
    residue_term: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': self.value,
            'est_error': self.est_error,
            'panels': self.panels,
            'tail_value': self.tail_value,
            'tail_bound': self.tail_bound,
            'residue_term': self.residue_term,
        }


@dataclass
class DensityExpansion:
    N: int
    main_coeff: float
    pole_terms: List[Tuple[float, float]] = field(default_factory=list)  # (|s_i|, 1/psi'(s_i))
    remainder_order: float = 0.0

    def evaluate(self, x: float) -> float:
        if not 0.0 < x < 0.5:
            raise DomainError(f"density expansion holds on (0, 1/2), got x={x}")
        return self.main_coeff / x + sum(c * x ** e for e, c in self.pole_terms)


def _log_poly(coeffs: Tuple[float, ...], log_inverse: float) -> float:
    return sum(c * log_inverse ** j for j, c in enumerate(coeffs))


@dataclass
class MomentDensityExpansion:
    """
    Density of the k-th moment measure near 0
    main_poly[j] multiplies (-log x)^j / x; each pole term (e, coeffs)
    contributes x^e * sum_j coeffs[j] (-log x)^j.
    """
    k: int
    N: int
    main_poly: Tuple[float, ...]
    pole_terms: List[Tuple[float, Tuple[float, ...]]] = field(default_factory=list)
    remainder_order: float = 0.0

    def main_term(self, x: float) -> float:
        if not 0.0 < x < 1.0:
            raise DomainError(f"main term holds on (0, 1), got x={x}")
        return _log_poly(self.main_poly, -math.log(x)) / x

    def evaluate(self, x: float) -> float:
        if not 0.0 < x < 0.5:
            raise DomainError(f"density expansion holds on (0, 1/2), got x={x}")
        log_inverse = -math.log(x)
        poles = sum(x ** e * _log_poly(coeffs, log_inverse) for e, coeffs in self.pole_terms)
        return self.main_term(x) + poles

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'N': self.N,
            'main_poly': list(self.main_poly),
            'pole_terms': [{'exponent': e, 'coefficients': list(c)} for e, c in self.pole_terms],
            'remainder_order': self.remainder_order,
        }


class TailRegime(str, Enum):
    LOWER_EXACT = 'lower_exact'
    UPPER_EXACT = 'upper_exact'
    UPPER_BOUND_ONLY = 'upper_bound_only'


@dataclass(frozen=True)
class RateFunctionSample:
    x: float
    rho_hat: float
    lambda_star: float
    derivative: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'x': self.x,
            'rho_hat': self.rho_hat,
            'lambda_star': self.lambda_star,
            'derivative': self.derivative,
        }
