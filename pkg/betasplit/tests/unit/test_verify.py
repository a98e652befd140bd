import numpy as np
import pytest

from errors import DomainError
from services.hd_exact import build_kernel
from services.report_generator import to_json
from services.simulate import sample_split, stream_rng
from services.verify import _agreement, _binned_p_value, _quad_transform, run_suite


@pytest.fixture(scope='module')
def core_report():
    return run_suite('core')


def _failures(report):
    return [row.quantity for row in report.failed_rows()]


def test_core_suite_passes(core_report):
    assert core_report.passed, _failures(core_report)


def test_core_suite_rows(core_report):
    names = {row.quantity for row in core_report.rows}
    for expected in ('psi_roots', 'c0', 'b0', 'E[D_3]', 'a(3,2)', 'q(4, .)',
                     'rate_function convexity', 'report_schema_roundtrip'):
        assert expected in names


def test_core_suite_is_deterministic(core_report):
    assert to_json(run_suite('core').to_dict()) == to_json(core_report.to_dict())


def test_unknown_suite():
    with pytest.raises(DomainError):
        run_suite('everything')


def test_agreement_rows():
    row = _agreement('q', [1, 2], [1.0, 2.0], {'other': [1.0 + 1e-9, 2.0]}, 1e-8)
    assert row.passed
    assert row.values['exact'] == [1.0, 2.0]
    relative = _agreement('r', [1], [1000.0], {'other': [1000.5]}, 1e-4, relative=True)
    assert not relative.passed
    assert abs(relative.deltas['other'][0] - 5e-4) < 1e-15


def test_binned_p_value_separates_kernels():
    draws = sample_split(np.full(50_000, 10), stream_rng(3, 0))
    wrong = np.full(9, 1 / 9)
    assert 0.0 <= _binned_p_value(draws, build_kernel(10).split_probs) <= 1.0
    assert _binned_p_value(draws, wrong) < 1e-10


@pytest.mark.slow
@pytest.mark.parametrize('suite', ['expansions', 'mellin'])
def test_numerical_suites_pass(suite):
    report = run_suite(suite)
    assert report.passed, _failures(report)


@pytest.mark.slow
def test_simulation_suite_passes():
    report = run_suite('simulation', threads=4)
    assert report.passed, _failures(report)


def test_quadrature_reference_for_transforms():
    for s in (0.5, 2 + 1j):
        assert abs(_quad_transform('f', 2, s) - 1 / (1 + s)) < 1e-10
        assert abs(_quad_transform('lambda', 2, s) - 1 / (1 + s)) < 1e-10


@pytest.mark.slow
def test_mellin_suite_layout():
    names = {row.quantity for row in run_suite('mellin').rows}
    for kind in ('ED', 'EL', 'ELambda'):
        assert f'{kind} exact vs expansion' in names
        assert f'{kind} contour independence n=50' in names
    assert 'transforms vs quadrature n=2,7' in names
