import math

import pytest

from errors import SeriesTruncationError
from services.laurent import TruncatedLaurentSeries


def _coeffs(series):
    return [complex(c).real for c in series.coefficients]


def test_reciprocal_of_geometric_factor():
    series = TruncatedLaurentSeries.taylor([1.0, -1.0, 0.0, 0.0])
    inverse = series.reciprocal()
    assert inverse.lowest_exponent == 0
    assert all(abs(c - 1.0) < 1e-14 for c in _coeffs(inverse))


def test_reciprocal_of_a_zero_gives_a_pole():
    series = TruncatedLaurentSeries(1, [2.0, 0.0, 0.0])
    inverse = series.reciprocal()
    assert inverse.lowest_exponent == -1
    assert abs(inverse.residue() - 0.5) < 1e-15


def test_residue_reads_the_minus_one_coefficient():
    series = TruncatedLaurentSeries(-1, [1.0, 2.0, 3.0])
    assert series.residue() == 1.0
    assert series.coefficient(1) == 3.0


def test_coefficient_past_truncation_raises():
    series = TruncatedLaurentSeries.taylor([1.0, 2.0])
    with pytest.raises(SeriesTruncationError):
        series.coefficient(5)


def test_product_and_power():
    series = TruncatedLaurentSeries.taylor([1.0, 1.0, 0.0])
    square = series * series
    assert _coeffs(square) == [1.0, 2.0, 1.0]
    assert _coeffs(series ** 2) == [1.0, 2.0, 1.0]


def test_negative_power_of_a_zero():
    series = TruncatedLaurentSeries(1, [1.0, 1.0, 0.0, 0.0])
    inverse_square = series ** -2
    assert inverse_square.lowest_exponent == -2
    assert abs(inverse_square.coefficient(-2) - 1.0) < 1e-14
    assert abs(inverse_square.coefficient(-1) + 2.0) < 1e-14


def test_exp_of_identity_series():
    series = TruncatedLaurentSeries.taylor([0.0, 1.0, 0.0, 0.0, 0.0])
    expected = [1 / math.factorial(j) for j in range(5)]
    assert all(abs(c - e) < 1e-15 for c, e in zip(_coeffs(series.exp()), expected))


def test_exp_carries_the_constant_term():
    series = TruncatedLaurentSeries.taylor([math.log(2.0), 1.0, 0.0])
    assert abs(_coeffs(series.exp())[0] - 2.0) < 1e-14
    assert abs(_coeffs(series.exp())[2] - 1.0) < 1e-14


def test_scalar_arithmetic():
    series = TruncatedLaurentSeries.taylor([1.0, 2.0, 3.0])
    assert _coeffs(series + 1.0) == [2.0, 2.0, 3.0]
    assert _coeffs(series - 1.0) == [0.0, 2.0, 3.0]
    assert _coeffs(2.0 * series) == [2.0, 4.0, 6.0]


def test_evaluate_includes_the_pole():
    series = TruncatedLaurentSeries(-1, [1.0, 0.0, 0.0])
    assert abs(series.evaluate(0.5) - 2.0) < 1e-15
