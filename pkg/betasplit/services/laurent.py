"""
Truncated Laurent series arithmetic for residue extraction at poles of
order two and higher.
"""
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np

from errors import SeriesTruncationError

_RESIDUAL_TOL = 1e-10
Number = Union[int, float, complex]


@dataclass(frozen=True)
class TruncatedLaurentSeries:
    """sum_j coefficients[j] * eps**(lowest_exponent + j), truncated"""
    lowest_exponent: int
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coefficients, dtype=np.complex128)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise SeriesTruncationError("a series needs at least one coefficient")
        object.__setattr__(self, 'coefficients', coeffs)

    @classmethod
    def taylor(cls, coefficients: Sequence[Number]) -> 'TruncatedLaurentSeries':
        return cls(0, np.asarray(coefficients))

    @property
    def length(self) -> int:
        return int(self.coefficients.size)

    @property
    def highest_exponent(self) -> int:
        return self.lowest_exponent + self.length - 1

    def coefficient(self, exponent: int) -> complex:
        if exponent < self.lowest_exponent:
            return 0j
        if exponent > self.highest_exponent:
            raise SeriesTruncationError(
                f"exponent {exponent} beyond truncation at {self.highest_exponent}")
        return complex(self.coefficients[exponent - self.lowest_exponent])

    def residue(self) -> complex:
        return self.coefficient(-1)

    def shift(self, power: int) -> 'TruncatedLaurentSeries':
        """Multiply by eps**power"""
        return TruncatedLaurentSeries(self.lowest_exponent + power, self.coefficients)

    def truncate(self, length: int) -> 'TruncatedLaurentSeries':
        return TruncatedLaurentSeries(self.lowest_exponent, self.coefficients[:length])

    def __neg__(self) -> 'TruncatedLaurentSeries':
        return TruncatedLaurentSeries(self.lowest_exponent, -self.coefficients)

    def __add__(self, other: Any) -> 'TruncatedLaurentSeries':
        if not isinstance(other, TruncatedLaurentSeries):
            constant = np.zeros(max(1, self.highest_exponent + 1), dtype=np.complex128)
            constant[0] = other
            other = TruncatedLaurentSeries(0, constant)
        low = min(self.lowest_exponent, other.lowest_exponent)
        high = min(self.highest_exponent, other.highest_exponent)
        coeffs = np.zeros(high - low + 1, dtype=np.complex128)
        for series in (self, other):
            for j in range(low, high + 1):
                if j >= series.lowest_exponent:
                    coeffs[j - low] += series.coefficients[j - series.lowest_exponent]
        return TruncatedLaurentSeries(low, coeffs)

    __radd__ = __add__

    def __sub__(self, other: Any) -> 'TruncatedLaurentSeries':
        return self + (-other)

    def __mul__(self, other: Any) -> 'TruncatedLaurentSeries':
        if not isinstance(other, TruncatedLaurentSeries):
            return TruncatedLaurentSeries(self.lowest_exponent, self.coefficients * other)
        length = min(self.length, other.length)
        product = np.convolve(self.coefficients[:length], other.coefficients[:length])[:length]
        return TruncatedLaurentSeries(self.lowest_exponent + other.lowest_exponent, product)

    __rmul__ = __mul__

    def reciprocal(self) -> 'TruncatedLaurentSeries':
        b = self.coefficients
        scale = float(np.max(np.abs(b)))
        if abs(b[0]) <= 1e-14 * scale:
            raise SeriesTruncationError("leading coefficient vanishes; strip it before inverting")
        c = np.zeros_like(b)
        c[0] = 1.0 / b[0]
        for m in range(1, b.size):
            c[m] = -np.dot(b[1:m + 1], c[m - 1::-1]) / b[0]
        result = TruncatedLaurentSeries(-self.lowest_exponent, c)
        self._check_inverse(result)
        return result

    def _check_inverse(self, inverse: 'TruncatedLaurentSeries') -> None:
        product = np.convolve(self.coefficients, inverse.coefficients)[:self.length]
        magnitude = np.convolve(np.abs(self.coefficients), np.abs(inverse.coefficients))
        identity = np.zeros(self.length)
        identity[0] = 1.0
        residual = np.abs(product - identity)
        if np.any(residual > _RESIDUAL_TOL * np.maximum(1.0, magnitude[:self.length])):
            raise SeriesTruncationError(f"reciprocal residual {residual.max():.3e}")

    def __pow__(self, power: int) -> 'TruncatedLaurentSeries':
        base = self.reciprocal() if power < 0 else self
        result = TruncatedLaurentSeries(0, np.eye(1, base.length, dtype=np.complex128)[0])
        for _ in range(abs(power)):
            result = result * base
        return result

    def exp(self) -> 'TruncatedLaurentSeries':
        """exp of a Taylor series (lowest exponent >= 0)"""
        if self.lowest_exponent < 0:
            raise SeriesTruncationError("exp needs a series without negative powers")
        a = np.zeros(self.length + self.lowest_exponent, dtype=np.complex128)
        a[self.lowest_exponent:] = self.coefficients
        a = a[:self.length]
        g = np.zeros_like(a)
        g[0] = 1.0
        for m in range(1, a.size):
            j = np.arange(1, m + 1)
            g[m] = np.dot(j * a[1:m + 1], g[m - 1::-1]) / m
        return TruncatedLaurentSeries(0, np.exp(a[0]) * g)

    def evaluate(self, eps: Any) -> Any:
        powers = self.lowest_exponent + np.arange(self.length)
        eps = np.asarray(eps, dtype=np.complex128)
        total = sum(c * eps ** int(p) for c, p in zip(self.coefficients, powers))
        return total
