from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class ConstantBundle:
    euler_gamma: float
    zeta2: float
    zeta3: float
    zeta4: float
    bernoulli_even: Tuple[float, ...]  # B2, B4, ..., for the psi asymptotic series


@dataclass(frozen=True)
class RootTable:
    """Roots of psi(s) = target: one positive, one in each (-i, -(i-1))"""
    target: float
    roots: Tuple[Tuple[int, float], ...]
    positive_root: float
    brackets: Tuple[Tuple[float, float], ...] = ()

    @property
    def count(self) -> int:
        return len(self.roots)

    def root(self, index: int) -> float:
        return self.roots[index - 1][1]

    def abs_root(self, index: int) -> float:
        return -self.root(index)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'target': self.target,
            'positive_root': self.positive_root,
            'roots': [{'i': i, 'root': s} for i, s in self.roots],
        }


@dataclass(frozen=True)
class SplitKernel:
    m: int
    split_probs: np.ndarray    # q(m, i), i = 1..m-1
    descent_probs: np.ndarray  # q*(m, i), i = 1..m-1
    rate: float                # h_{m-1}


@dataclass
class ExactTables:
    """
    Exact finite-n values for the descent chain and the trees
    Arrays are indexed directly by n; index 0 is unused.
    """
    nmax: int
    kmax: int
    moments_D: np.ndarray    # shape (kmax+1, nmax+1), extended precision
    mean_L: np.ndarray
    mean_length: np.ndarray
    occupancy: Optional[np.ndarray] = None  # a(n, j) for j <= n <= occupancy_nmax
    occupancy_nmax: int = 0

    def mean_D(self, n: int) -> float:
        return float(self.moments_D[1, n])

    def variance_D(self, n: int) -> float:
        return float(self.moments_D[2, n] - self.moments_D[1, n] ** 2)

    def a(self, n: int, j: int) -> float:
        if self.occupancy is None or n > self.occupancy_nmax:
            raise IndexError(f"occupancy table covers n <= {self.occupancy_nmax}")
        return float(self.occupancy[n, j])

    def to_frame(self) -> pd.DataFrame:
        columns: Dict[str, Any] = {'n': np.arange(1, self.nmax + 1)}
        for k in range(1, self.kmax + 1):
            label = 'ED' if k == 1 else f'ED{k}'
            columns[label] = self.moments_D[k, 1:].astype(float)
        columns['EL'] = self.mean_L[1:].astype(float)
        columns['ELambda'] = self.mean_length[1:].astype(float)
        return pd.DataFrame(columns)

    def to_csv(self, path: Optional[str] = None) -> str:
        return self.to_frame().to_csv(path, index=False) or ''

    def to_dict(self) -> Dict[str, Any]:
        frame = self.to_frame()
        return {column: frame[column].tolist() for column in frame.columns}


@dataclass
class HopPmf:
    n: int
    probs: Dict[int, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return sum(k * p for k, p in self.probs.items())

    def tail(self, k: int) -> float:
        """Pr(L_n >= k)"""
        return sum(p for hops, p in self.probs.items() if hops >= k)

    def support(self) -> Sequence[int]:
        return sorted(self.probs)
