import math

import numpy as np
import pytest

from errors import QuadratureNonConvergenceError
from services.quadrature import integrate_half_line


def test_lorentzian_over_the_half_line():
    result = integrate_half_line(lambda t: 1.0 / (1.0 + t * t))
    assert abs(result.value - math.pi / 2) < 1e-9
    assert result.panels > 0
    assert result.est_error <= 1e-10
    # tail beyond the cutoff is arctan-like: about 1/cutoff
    assert abs(result.tail_value - 1e-4) < 1e-8
    assert result.tail_bound > 0


def test_exponential_decay():
    result = integrate_half_line(lambda t: np.exp(-t), cutoff=100.0)
    assert abs(result.value - 1.0) < 1e-10
    assert abs(result.tail_value) < 1e-12


def test_results_are_reproducible():
    def func(t):
        return np.exp(-t) * np.cos(3 * t)

    first = integrate_half_line(func, cutoff=1000.0, abs_tol=1e-9)
    second = integrate_half_line(func, cutoff=1000.0, abs_tol=1e-9)
    assert first.value == second.value
    assert abs(first.value - 0.1) < 1e-8


def test_panel_budget_is_enforced():
    with pytest.raises(QuadratureNonConvergenceError):
        integrate_half_line(lambda t: np.cos(50 * t) / (1.0 + t * t),
                            abs_tol=1e-12, max_panels=5)
