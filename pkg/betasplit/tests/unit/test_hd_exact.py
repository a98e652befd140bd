import logging
import math

import numpy as np
import pytest
from scipy import integrate

from errors import DomainError, PrecisionError, ResourceError
from services.hd_exact import (
    alt_sum_ED,
    build_exact_tables,
    build_kernel,
    height_survival,
    hop_pmf,
    mgf_exact,
    occupancy_closed_form,
    occupancy_column,
    subtree_counts,
)
from services.specfun import harmonic


@pytest.fixture(scope='module')
def tables():
    return build_exact_tables(40, 3, 40)


def test_kernel_of_size_four():
    kernel = build_kernel(4)
    assert np.allclose(kernel.split_probs, [4 / 11, 3 / 11, 4 / 11], atol=1e-15)
    assert abs(kernel.descent_probs.sum() - 1.0) < 1e-15
    assert abs(kernel.rate - 11 / 6) < 1e-15


def test_kernel_rows_are_distributions():
    for m in (2, 3, 17, 500):
        kernel = build_kernel(m)
        assert abs(kernel.split_probs.sum() - 1.0) < 1e-12
        assert abs(kernel.descent_probs.sum() - 1.0) < 1e-12


def test_singleton_does_not_split():
    with pytest.raises(DomainError):
        build_kernel(1)


def test_small_n_values(tables):
    assert tables.mean_D(1) == 0.0
    assert abs(tables.mean_D(2) - 1.0) < 1e-15
    assert abs(tables.mean_D(3) - 4 / 3) < 1e-15
    assert abs(float(tables.moments_D[2, 3]) - 28 / 9) < 1e-14
    assert abs(tables.variance_D(3) - 4 / 3) < 1e-14
    assert abs(float(tables.mean_L[3]) - 5 / 3) < 1e-15
    assert abs(float(tables.mean_length[2]) - 1.0) < 1e-15
    assert abs(float(tables.mean_length[3]) - 5 / 3) < 1e-15
    assert abs(tables.a(3, 2) - 2 / 3) < 1e-15
    assert abs(tables.a(4, 2) - 7 / 11) < 1e-15


def test_variance_positive_and_monotonicity_warning(caplog):
    with caplog.at_level(logging.WARNING, logger='services.hd_exact'):
        fresh = build_exact_tables(40, 2, occupancy_nmax=0)
    assert all(fresh.variance_D(n) > 0 for n in range(2, 41))
    means = [fresh.mean_D(n) for n in range(1, 41)]
    increasing = all(a < b for a, b in zip(means, means[1:]))
    assert ('not increasing' in caplog.text) == (not increasing)


def test_occupancy_rows(tables):
    for n in range(2, 41):
        assert abs(tables.a(n, 1) - 1.0) < 1e-13
        assert tables.a(n, n) == 1.0


def test_occupation_sums_reproduce_the_means(tables):
    # leaf 1 holds a size-j clade for an Exp(h_{j-1}) time whenever it visits j
    for n in range(2, 41):
        sizes = range(2, n + 1)
        height = sum(tables.a(n, j) / harmonic(j - 1) for j in sizes)
        hops = sum(tables.a(n, j) for j in sizes)
        length = sum(n * tables.a(n, j) / (j * harmonic(j - 1)) for j in sizes)
        assert abs(height - tables.mean_D(n)) < 1e-12
        assert abs(hops - float(tables.mean_L[n])) < 1e-12
        assert abs(length - float(tables.mean_length[n])) < 1e-11


def test_alternating_sum_matches_table(tables):
    assert abs(alt_sum_ED(3, 30) - 4 / 3) < 1e-14
    for n in range(2, 41):
        assert abs(alt_sum_ED(n, 30) - tables.mean_D(n)) < 1e-12


def test_alternating_sum_limits():
    with pytest.raises(DomainError):
        alt_sum_ED(1, 30)
    with pytest.raises(DomainError):
        alt_sum_ED(10, 20)
    with pytest.raises(PrecisionError):
        alt_sum_ED(250, 30)


def test_occupancy_closed_form(tables):
    assert abs(occupancy_closed_form(3, 2, 30) - 2 / 3) < 1e-15
    assert abs(occupancy_closed_form(4, 2, 30) - 7 / 11) < 1e-15
    assert abs(occupancy_closed_form(12, 12, 30) - 1.0) < 1e-15
    for j in (2, 3, 7):
        for n in range(j, 41):
            assert abs(occupancy_closed_form(n, j, 30) - tables.a(n, j)) < 1e-12


def test_occupancy_column_matches_triangle(tables):
    column = occupancy_column(2, 40)
    for n in range(2, 41):
        assert abs(column[n] - tables.a(n, 2)) < 1e-14
    assert column[1] == 0.0


def test_subtree_counts(tables):
    counts = subtree_counts(10, tables)
    for j in range(2, 11):
        assert abs(counts[j] - 10 * tables.a(10, j) / j) < 1e-15
    assert counts[10] == 1.0


def test_hop_pmf_small_n(tables):
    pmf = hop_pmf(3)
    assert set(pmf.probs) == {1, 2}
    assert abs(pmf.probs[1] - 1 / 3) < 1e-15
    assert abs(pmf.probs[2] - 2 / 3) < 1e-15
    assert hop_pmf(1).probs == {0: 1.0}


def test_hop_pmf_is_a_distribution_with_the_right_mean(tables):
    pmf = hop_pmf(40)
    assert abs(sum(pmf.probs.values()) - 1.0) < 1e-13
    assert min(pmf.support()) >= 1 and max(pmf.support()) <= 39
    assert abs(pmf.mean - float(tables.mean_L[40])) < 1e-12
    assert abs(pmf.tail(1) - 1.0) < 1e-13


def test_hop_pmf_budget():
    with pytest.raises(ResourceError):
        hop_pmf(10 ** 6)


def test_mgf_exact(tables):
    assert abs(mgf_exact(25, 0.0) - 1.0) < 1e-15
    for z in (-2.0, 0.5):
        assert abs(mgf_exact(2, z) - 1 / (1 - z)) < 1e-15
    delta = 1e-5
    slope = (mgf_exact(3, delta) - mgf_exact(3, -delta)) / (2 * delta)
    assert abs(slope - 4 / 3) < 1e-8
    with pytest.raises(DomainError):
        mgf_exact(3, 1.0)


def test_table_budgets():
    with pytest.raises(DomainError):
        build_exact_tables(10, 7)
    with pytest.raises(ResourceError):
        build_exact_tables(10 ** 6, 1)


def test_table_frame_layout(tables):
    frame = tables.to_frame()
    assert list(frame.columns) == ['n', 'ED', 'ED2', 'ED3', 'EL', 'ELambda']
    assert len(frame) == 40
    assert tables.to_csv().splitlines()[0] == 'n,ED,ED2,ED3,EL,ELambda'


def test_hop_tail_is_non_increasing():
    pmf = hop_pmf(60)
    tails = [pmf.tail(k) for k in range(0, 62)]
    assert abs(tails[0] - 1.0) < 1e-13
    assert all(b <= a + 1e-14 for a, b in zip(tails, tails[1:]))
    assert tails[-1] == 0.0


def test_mgf_exact_dominates_jensen_bound(tables):
    mean = tables.mean_D(40)
    for z in (-2.0, -0.5, 0.3, 0.7):
        assert mgf_exact(40, z) >= math.exp(z * mean)


def test_height_survival_small_cases():
    assert height_survival(1, 2.0) == 0.0
    assert height_survival(7, 0.0) == pytest.approx(1.0, abs=1e-15)
    times = np.array([0.1, 1.0, 3.0])
    assert np.allclose(height_survival(2, times), np.exp(-times), rtol=0, atol=1e-12)


def test_height_survival_is_a_decreasing_tail():
    times = np.linspace(0.0, 10.0, 41)
    survival = height_survival(30, times)
    assert np.all(np.diff(survival) <= 1e-14)
    assert np.all((survival >= 0.0) & (survival <= 1.0))


def test_height_survival_integrates_to_the_moments(tables):
    # Pr(D_10 > 60) is below 1e-20, so truncating at t = 60 is harmless
    mean = integrate.quad(lambda t: height_survival(10, t), 0.0, 60.0, limit=200)[0]
    second = 2 * integrate.quad(lambda t: t * height_survival(10, t), 0.0, 60.0, limit=200)[0]
    assert abs(mean - tables.mean_D(10)) < 1e-8
    assert abs(second - float(tables.moments_D[2, 10])) < 1e-7


def test_height_survival_limits():
    with pytest.raises(DomainError):
        height_survival(0, 1.0)
    with pytest.raises(DomainError):
        height_survival(5, -1.0)
    with pytest.raises(ResourceError):
        height_survival(10 ** 6, 1.0)
