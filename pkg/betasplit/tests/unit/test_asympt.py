import math

import pytest

from errors import DomainError, InsufficientRootsError
from services.asympt import (
    a_limit,
    ed_expansion,
    el_expansion,
    expansion_constants,
    length_expansion,
    moment_expansion,
    moment_residue,
    subtree_count_limit,
    var_d_approx,
)
from services.hd_exact import build_exact_tables, occupancy_column
from services.specfun import CONSTANTS, EULER_GAMMA, harmonic, polygamma, psi_roots

ZETA2 = CONSTANTS.zeta2
ZETA3 = CONSTANTS.zeta3


@pytest.fixture(scope='module')
def tables():
    return build_exact_tables(2000, 3, 0)


@pytest.fixture(scope='module')
def constants():
    return expansion_constants()


def test_named_constants(constants):
    assert abs(constants['c0'] - 0.795155660439) < 1e-10
    assert abs(constants['b0'] - 0.78234) < 1e-5
    assert abs(constants['pole1_coefficient'] + 0.0943) < 5e-4
    assert abs(constants['mu'] - 0.6079) < 1e-4
    assert abs(constants['sigma2'] - 0.5401) < 1e-4


def test_ed_expansion_against_exact(tables):
    result = ed_expansion(1000)
    assert [label for label, _ in result.terms] == ['main', 'const', 'pole1', 'pole2']
    assert abs(result.value - tables.mean_D(1000)) < 1e-8
    assert result.pole_terms_decreasing()
    assert result.error_order < -3


def test_el_expansion_against_exact(tables):
    exact = float(tables.mean_L[2000])
    assert abs(el_expansion(2000).value - exact) < 1e-6 * exact


def test_el_log_coefficient_and_constant(constants):
    n = 10 ** 6
    log_n = math.log(n)
    remainder = el_expansion(n).value - log_n ** 2 / (2 * ZETA2) - constants['c0'] * log_n
    assert abs(remainder - constants['b0']) < 1e-4


def test_length_expansion(tables):
    assert abs(length_expansion(500, 0).value / 500 - 6 / math.pi ** 2) < 1e-15
    exact = float(tables.mean_length[1000])
    crude = abs(length_expansion(1000, 0).value - exact)
    refined = abs(length_expansion(1000, 1).value - exact)
    assert refined < 0.1 * crude


def test_high_precision_path_agrees():
    for expansion in (ed_expansion, el_expansion, length_expansion):
        assert abs(float(expansion(500, 2, dps=30).value) - expansion(500, 2).value) < 1e-10


def test_first_moment_residue_at_zero():
    for n in (10, 100, 1000):
        expected = harmonic(n - 1) / ZETA2 + ZETA3 / ZETA2 ** 2
        assert abs(moment_residue(1, 0, n) - expected) < 1e-11


def test_second_moment_residue_at_zero():
    for n in (10, 100, 1000):
        h = harmonic(n - 1)
        expected = (h ** 2 / ZETA2 ** 2 + 4 * ZETA3 * h / ZETA2 ** 3 + 6 * ZETA3 ** 2 / ZETA2 ** 4
                    - 18 / (5 * math.pi ** 2) - polygamma(1, float(n)) / ZETA2 ** 2)
        assert abs(moment_residue(2, 0, n) - expected) < 1e-9


def test_first_moment_expansion_matches_ed():
    via_residues = moment_expansion(1, 100, 2).value
    assert abs(via_residues - ed_expansion(100, 2).value) < 1e-11
    assert abs(moment_residue(1, 1, 100) - ed_expansion(100, 1).terms[2][1]) < 1e-12


def test_third_moment_expansion(tables):
    exact = float(tables.moments_D[3, 2000])
    assert abs(moment_expansion(3, 2000, 2).value - exact) < 1e-4 * exact


def test_variance_approximation(tables):
    for n in (500, 1000, 2000):
        assert abs(var_d_approx(n) - tables.variance_D(n)) < 5 * math.log(n) / n


def test_occupation_limits():
    assert abs(a_limit(2) - 6 / math.pi ** 2) < 1e-15
    assert abs(a_limit(3) - 0.75 * 6 / math.pi ** 2) < 1e-15
    assert abs(subtree_count_limit(100, 2) - 100 * a_limit(2) / 2) < 1e-13
    with pytest.raises(DomainError):
        a_limit(1)


def test_occupation_converges_to_limit():
    column = occupancy_column(2, 3200)
    early = abs(column[200] - a_limit(2))
    late = abs(column[3200] - a_limit(2))
    assert late < early / 10


def test_expansion_argument_checks():
    with pytest.raises(InsufficientRootsError):
        ed_expansion(100, 3, psi_roots(-EULER_GAMMA, 3))
    with pytest.raises(InsufficientRootsError):
        ed_expansion(100, 1, psi_roots(0.0, 4))
    with pytest.raises(DomainError):
        el_expansion(1)
    with pytest.raises(DomainError):
        moment_residue(7, 0, 10)
