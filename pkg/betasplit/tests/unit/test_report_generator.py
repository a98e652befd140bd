import json
import math

import numpy as np
import pytest

from models.reports import VerifyReport, VerifyRow
from services.report_generator import ReportGenerator, to_json


@pytest.fixture
def sample_report():
    passing = VerifyRow(quantity='E[D_3]', n_grid=[3.0], values={'hand': [4 / 3], 'line': [4 / 3]},
                        tolerance=1e-7, deltas={'line': [1e-12]})
    failing = VerifyRow(quantity='spread', n_grid=[100.0, 200.0], values={'exact': [1.0, 2.0]},
                        tolerance=5.0, kind='spread', scaled_errors=[1.0, 30.0],
                        error_order=-1.5)
    for row in (passing, failing):
        row.recompute()
    return VerifyReport('core', [passing, failing])


def test_row_kinds():
    row = VerifyRow('abs', [1.0], {}, 1e-3, deltas={'x': [5e-4, -9e-4]})
    assert row.recompute()
    row.deltas = {'x': [2e-3]}
    assert not row.recompute()

    spread = VerifyRow('s', [1.0, 2.0, 3.0], {}, 5.0, kind='spread', scaled_errors=[1.0, 2.0, 4.0])
    assert spread.recompute()
    spread.scaled_errors = [0.1, 2.0, 4.0]
    assert not spread.recompute()

    assert VerifyRow('b', [0.0], {'v': [0.5]}, 1.0, kind='bound').recompute()
    assert not VerifyRow('b', [0.0], {'v': [1.5]}, 1.0, kind='bound').recompute()
    assert VerifyRow('f', [0.0], {'p': [0.2]}, 1e-3, kind='floor').recompute()
    assert not VerifyRow('f', [0.0], {'p': [1e-5]}, 1e-3, kind='floor').recompute()


def test_empty_rows_do_not_pass():
    assert not VerifyRow('empty', [], {}, 1.0).recompute()


def test_unknown_kind():
    with pytest.raises(ValueError):
        VerifyRow('x', [0.0], {}, 1.0, kind='median').recompute()


def test_report_status(sample_report):
    assert not sample_report.passed
    assert [row.quantity for row in sample_report.failed_rows()] == ['spread']


def test_report_json_round_trip(sample_report):
    decoded = VerifyReport.from_dict(json.loads(json.dumps(sample_report.to_dict())))
    assert decoded.to_dict() == sample_report.to_dict()


def test_to_json_normalizes_values():
    payload = json.loads(to_json({
        'third': 1 / 3,
        'inf': math.inf,
        'nan': float('nan'),
        'array': np.array([0.5, 2.0]),
        'long': np.longdouble(1) / 7,
        'complex': 1 + 2j,
        'flag': np.bool_(True),
    }))
    assert payload['third'] == 0.333333333333333
    assert payload['inf'] == 'inf'
    assert payload['nan'] == 'nan'
    assert payload['array'] == [0.5, 2.0]
    assert payload['long'] == 0.142857142857143
    assert payload['complex'] == {'real': 1.0, 'imag': 2.0}
    assert payload['flag'] is True


def test_to_json_sorts_keys():
    text = to_json({'b': 1, 'a': 2})
    assert text.index('"a"') < text.index('"b"')


def test_generate_report_all_formats(tmp_path, sample_report):
    generator = ReportGenerator(str(tmp_path))
    paths = generator.generate_report_all_formats(sample_report)
    assert set(paths) == {'json', 'txt', 'csv'}
    assert paths['json'].endswith('core_verify.json')

    with open(paths['json']) as handle:
        assert VerifyReport.from_dict(json.load(handle)).rows[0].quantity == 'E[D_3]'
    with open(paths['txt']) as handle:
        text = handle.read()
    assert 'FAILED (1 of 2 rows failed)' in text
    with open(paths['csv']) as handle:
        assert handle.readline().strip().startswith('quantity,kind,points')


def test_reports_are_byte_identical(tmp_path, sample_report):
    first = ReportGenerator(str(tmp_path / 'a')).generate_report_all_formats(sample_report)
    second = ReportGenerator(str(tmp_path / 'b')).generate_report_all_formats(sample_report)
    for fmt in ('json', 'txt', 'csv'):
        with open(first[fmt], 'rb') as a, open(second[fmt], 'rb') as b:
            assert a.read() == b.read()
