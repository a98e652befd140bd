from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class VerifyRow:
    """
    One tolerance row of a verify suite
    kind 'abs' compares every delta against tolerance; kind 'spread'
    requires scaled errors to stay within a factor `tolerance` of their
    median; kind 'bound' requires each value to stay at or below tolerance
    and kind 'floor' at or above it.
    """
    quantity: str
    n_grid: List[float]
    values: Dict[str, List[float]]
    tolerance: float
    kind: str = 'abs'
    deltas: Dict[str, List[float]] = field(default_factory=dict)
    scaled_errors: List[float] = field(default_factory=list)
    error_order: Optional[float] = None
    passed: bool = False

    def recompute(self) -> bool:
        if self.kind == 'abs':
            checks = [abs(d) <= self.tolerance for ds in self.deltas.values() for d in ds]
        elif self.kind == 'spread':
            scaled = sorted(abs(e) for e in self.scaled_errors)
            median = scaled[len(scaled) // 2] if scaled else 0.0
            checks = [median > 0.0 and median / self.tolerance <= e <= median * self.tolerance
                      for e in scaled]
        elif self.kind == 'bound':
            checks = [v <= self.tolerance for vs in self.values.values() for v in vs]
        elif self.kind == 'floor':
            checks = [v >= self.tolerance for vs in self.values.values() for v in vs]
        else:
            raise ValueError(f"unknown row kind {self.kind}")
        self.passed = bool(checks) and all(checks)
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            'quantity': self.quantity,
            'kind': self.kind,
            'n_grid': self.n_grid,
            'values': self.values,
            'deltas': self.deltas,
            'scaled_errors': self.scaled_errors,
            'error_order': self.error_order,
            'tolerance': self.tolerance,
            'passed': self.passed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VerifyRow':
        return cls(
            quantity=data['quantity'],
            n_grid=list(data['n_grid']),
            values={k: list(v) for k, v in data['values'].items()},
            tolerance=data['tolerance'],
            kind=data.get('kind', 'abs'),
            deltas={k: list(v) for k, v in data.get('deltas', {}).items()},
            scaled_errors=list(data.get('scaled_errors', [])),
            error_order=data.get('error_order'),
            passed=data.get('passed', False),
        )


@dataclass
class VerifyReport:
    suite: str
    rows: List[VerifyRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failed_rows(self) -> List[VerifyRow]:
        return [row for row in self.rows if not row.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'suite': self.suite,
            'passed': self.passed,
            'rows': [row.to_dict() for row in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'VerifyReport':
        return cls(suite=data['suite'], rows=[VerifyRow.from_dict(r) for r in data['rows']])
