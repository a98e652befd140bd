import json
import math
import os
from typing import Any, Dict

import numpy as np
import pandas as pd

from models.reports import VerifyReport

SIGNIFICANT_DIGITS = 15


def _normalize(value: Any) -> Any:
    """Plain JSON types with floats rounded to 15 significant digits"""
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_normalize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, complex):
        return {'real': _normalize(value.real), 'imag': _normalize(value.imag)}
    if isinstance(value, (float, np.floating)) or hasattr(value, '__float__'):
        number = float(value)
        if math.isnan(number):
            return 'nan'
        if math.isinf(number):
            return 'inf' if number > 0 else '-inf'
        return float(f'{number:.{SIGNIFICANT_DIGITS}g}')
    return value


def to_json(payload: Any) -> str:
    """Deterministic JSON: sorted keys, rounded floats, no timestamps"""
    return json.dumps(_normalize(payload), sort_keys=True, indent=2)


class ReportGenerator:
    """Writes a verify report as JSON, a plain-text table and CSV"""

    def __init__(self, output_dir: str = 'reports'):
        self.output_dir = output_dir

    def generate_report_all_formats(self, report: VerifyReport) -> Dict[str, str]:
        """Generate reports in all formats and return file paths"""
        os.makedirs(self.output_dir, exist_ok=True)
        stem = os.path.join(self.output_dir, f"{report.suite}_verify")

        formats = {}
        formats['json'] = self.generate_json_report(report, f"{stem}.json")
        formats['txt'] = self.generate_text_report(report, f"{stem}.txt")
        formats['csv'] = self.generate_csv_report(report, f"{stem}.csv")
        return formats

    def generate_json_report(self, report: VerifyReport, output_path: str) -> str:
        with open(output_path, 'w') as handle:
            handle.write(to_json(report.to_dict()))
            handle.write('\n')
        return output_path

    def rows_frame(self, report: VerifyReport) -> pd.DataFrame:
        """One line per row: worst delta, scaled-error spread and verdict"""
        records = []
        for row in report.rows:
            deltas = [abs(d) for ds in row.deltas.values() for d in ds]
            scaled = [abs(e) for e in row.scaled_errors]
            records.append({
                'quantity': row.quantity,
                'kind': row.kind,
                'points': len(row.n_grid),
                'max_abs_delta': max(deltas) if deltas else np.nan,
                'scaled_min': min(scaled) if scaled else np.nan,
                'scaled_max': max(scaled) if scaled else np.nan,
                'error_order': row.error_order if row.error_order is not None else np.nan,
                'tolerance': row.tolerance,
                'passed': row.passed,
            })
        return pd.DataFrame.from_records(records, columns=[
            'quantity', 'kind', 'points', 'max_abs_delta', 'scaled_min', 'scaled_max',
            'error_order', 'tolerance', 'passed'])

    def generate_text_report(self, report: VerifyReport, output_path: str) -> str:
        frame = self.rows_frame(report)
        status = 'PASSED' if report.passed else 'FAILED'
        with open(output_path, 'w') as handle:
            handle.write(f"VERIFY SUITE: {report.suite}\n")
            handle.write(f"Status: {status} ({len(report.failed_rows())} of "
                         f"{len(report.rows)} rows failed)\n\n")
            handle.write(frame.to_string(index=False, float_format=lambda v: f'{v:.6g}'))
            handle.write('\n')
        return output_path

    def generate_csv_report(self, report: VerifyReport, output_path: str) -> str:
        self.rows_frame(report).to_csv(output_path, index=False, float_format='%.15g')
        return output_path
