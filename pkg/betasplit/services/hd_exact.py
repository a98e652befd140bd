"""
Exact Values Service
First-step recurrences for the harmonic descent chain and the split
trees: moments of the leaf height, hop counts, tree length, occupation
probabilities, the hop-count distribution and the exact MGF, plus the
high-precision closed-form sums used as independent oracles.
"""
import logging
import math
import time
from functools import lru_cache
from typing import Any, Optional

import mpmath
import numpy as np
from scipy.sparse.linalg import expm_multiply

from config import Config
from errors import DomainError, PrecisionError, ResourceError
from models.tables import ExactTables, HopPmf, SplitKernel
from services.specfun import harmonic

logger = logging.getLogger(__name__)


def build_kernel(m: int) -> SplitKernel:
    """Split row q(m, .) and descent row q*(m, .) of a size-m clade"""
    if m < 2:
        raise DomainError(f"a clade of size {m} does not split")
    h = harmonic(m - 1)
    i = np.arange(1, m, dtype=np.int64)
    split = m / (2.0 * h * (i * (m - i)).astype(np.float64))
    descent = 1.0 / (h * (m - i).astype(np.float64))
    return SplitKernel(m=m, split_probs=split, descent_probs=descent, rate=h)


def _harmonic_column(nmax: int, dtype: type = np.longdouble) -> np.ndarray:
    """h_0 .. h_nmax accumulated in the requested precision"""
    terms = np.zeros(nmax + 1, dtype=dtype)
    terms[1:] = 1 / np.arange(1, nmax + 1, dtype=dtype)
    return np.cumsum(terms)


def _descent_weights(n: int, dtype: type = np.longdouble) -> np.ndarray:
    """1/(n - i) for i = 1 .. n-1"""
    return 1 / np.arange(n - 1, 0, -1, dtype=dtype)


def _check_budget(nmax: int, kmax: int, occupancy_nmax: int) -> None:
    if nmax < 1:
        raise DomainError("nmax must be >= 1")
    if not 1 <= kmax <= Config.MOMENT_KMAX:
        raise DomainError(f"kmax must lie in 1..{Config.MOMENT_KMAX}")
    if nmax > Config.MEANS_NMAX or float(nmax) ** 2 * kmax > Config.TABLE_BUDGET:
        raise ResourceError(f"tables for nmax={nmax}, kmax={kmax} exceed the configured budget")
    if occupancy_nmax > Config.OCCUPANCY_NMAX:
        raise ResourceError(f"occupancy triangle limited to n <= {Config.OCCUPANCY_NMAX}")


def build_exact_tables(nmax: int, kmax: int, occupancy_nmax: Optional[int] = None) -> ExactTables:
    """Fill every exact table by increasing n"""
    if occupancy_nmax is None:
        occupancy_nmax = min(nmax, Config.OCCUPANCY_NMAX)
    occupancy_nmax = min(occupancy_nmax, nmax)
    _check_budget(nmax, kmax, occupancy_nmax)
    started = time.perf_counter()

    h = _harmonic_column(nmax)
    moments = np.zeros((kmax + 1, nmax + 1), dtype=np.longdouble)
    moments[0, 1:] = 1
    mean_l = np.zeros(nmax + 1, dtype=np.longdouble)
    mean_length = np.zeros(nmax + 1, dtype=np.longdouble)
    factorials = [math.factorial(j) for j in range(kmax + 1)]

    for n in range(2, nmax + 1):
        rate = h[n - 1]
        w = _descent_weights(n) / rate
        # inner[k] = sum_i q*(n, i) E[D_i^k]
        inner = moments[:, 1:n] @ w
        for k in range(1, kmax + 1):
            moments[k, n] = sum(
                math.comb(k, j) * factorials[j] / rate ** j * inner[k - j] for j in range(k + 1))
        mean_l[n] = 1 + np.dot(w, mean_l[1:n])
        i = np.arange(1, n, dtype=np.longdouble)
        q = n / (2 * rate * i * (n - i))
        mean_length[n] = 1 / rate + np.dot(q, mean_length[1:n] + mean_length[n - 1:0:-1])

    occupancy = _occupancy_triangle(occupancy_nmax) if occupancy_nmax >= 1 else None
    tables = ExactTables(
        nmax=nmax,
        kmax=kmax,
        moments_D=moments,
        mean_L=mean_l,
        mean_length=mean_length,
        occupancy=occupancy,
        occupancy_nmax=occupancy_nmax,
    )
    if nmax >= 3 and np.any(np.diff(moments[1, 1:]) <= 0):
        logger.warning("E[D_n] is not increasing on n <= %d", nmax)
    logger.info("exact tables nmax=%d kmax=%d occupancy_nmax=%d built in %.2fs",
                nmax, kmax, occupancy_nmax, time.perf_counter() - started)
    return tables


def _occupancy_triangle(nmax: int) -> np.ndarray:
    """
    a(n, j) for 1 <= j <= n <= nmax; row n = q*(n, .) applied to the rows below
    Each row sums over every lower state, so the fill costs O(nmax^3) time and
    O(nmax^2) memory.
    """
    h = _harmonic_column(nmax, np.float64)
    a = np.zeros((nmax + 1, nmax + 1), dtype=np.float64)
    a[1, 1] = 1.0
    for n in range(2, nmax + 1):
        w = _descent_weights(n, np.float64) / h[n - 1]
        a[n, 1:n] = w @ a[1:n, 1:n]
        a[n, n] = 1.0
    return a


def occupancy_column(j: int, nmax: int) -> np.ndarray:
    """a(n, j) for n = 0..nmax (zero below j), without the full triangle"""
    if j < 1 or nmax < j:
        raise DomainError(f"need 1 <= j <= nmax, got j={j}, nmax={nmax}")
    if nmax > Config.MEANS_NMAX:
        raise ResourceError(f"occupancy column limited to n <= {Config.MEANS_NMAX}")
    h = _harmonic_column(nmax, np.float64)
    column = np.zeros(nmax + 1, dtype=np.float64)
    column[j] = 1.0
    for n in range(j + 1, nmax + 1):
        column[n] = np.dot(_descent_weights(n, np.float64)[j - 1:], column[j:n]) / h[n - 1]
    return column


def _working_dps(n: int, digits: int, growth: float) -> int:
    if digits < 30:
        raise DomainError("digits must be >= 30")
    dps = digits + int(math.ceil(growth * n)) + 5
    if n > Config.ALT_SUM_NMAX or dps > Config.MAX_WORKING_DPS:
        raise PrecisionError(
            f"n={n} needs {dps} working digits; limits are n <= {Config.ALT_SUM_NMAX} "
            f"and {Config.MAX_WORKING_DPS} digits")
    return dps


def _mp_harmonic(m: int) -> mpmath.mpf:
    return mpmath.fsum(mpmath.mpf(1) / i for i in range(1, m + 1))


def alt_sum_ED(n: int, digits: int) -> float:
    """E[D_n] from the alternating binomial sum, in high precision"""
    if n < 2:
        raise DomainError("alt_sum_ED needs n >= 2")
    with mpmath.workdps(_working_dps(n, digits, 1 / 3)):
        terms = []
        h = mpmath.mpf(0)
        for j in range(1, n):
            h += mpmath.mpf(1) / j
            terms.append((-1) ** (j - 1) * math.comb(n - 1, j) / h)
        return float(mpmath.fsum(terms))


def occupancy_closed_form(n: int, j: int, digits: int) -> float:
    """a(n, j) from the signed multinomial sum, in high precision"""
    if not 2 <= j <= n:
        raise DomainError(f"need 2 <= j <= n, got n={n}, j={j}")
    # multinomial weights grow like 3^n rather than 2^n
    with mpmath.workdps(_working_dps(n, digits, 1 / 2)):
        h_low = _mp_harmonic(j - 1)
        h = h_low
        terms = []
        for k in range(0, n - j + 1):
            if k > 0:
                h += mpmath.mpf(1) / (j + k - 1)
            weight = math.comb(n - 1, j - 1) * math.comb(n - j, k)
            terms.append((-1) ** k * weight * h_low / h)
        return float(mpmath.fsum(terms))


def subtree_counts(n: int, tables: ExactTables) -> np.ndarray:
    """E[N_n(j)] = n a(n, j)/j at index j, for 2 <= j <= n"""
    if n > tables.occupancy_nmax:
        raise DomainError(f"n={n} beyond the occupancy table ({tables.occupancy_nmax})")
    counts = np.zeros(n + 1)
    j = np.arange(2, n + 1)
    counts[2:] = n * tables.occupancy[n, 2:n + 1] / j
    return counts


@lru_cache(maxsize=4)
def _hop_table(n: int) -> np.ndarray:
    """Pr(L_m = k) for m <= n; O(n^3) time over the (m, k, landing state) triple"""
    h = _harmonic_column(n, np.float64)
    table = np.zeros((n + 1, n), dtype=np.float64)
    table[1, 0] = 1.0
    for m in range(2, n + 1):
        w = _descent_weights(m, np.float64) / h[m - 1]
        table[m, 1:m] = w @ table[1:m, 0:m - 1]
    table.setflags(write=False)
    return table


def hop_pmf(n: int) -> HopPmf:
    """Distribution of the hop count L_n"""
    if n < 1:
        raise DomainError("hop_pmf needs n >= 1")
    if n > Config.HOP_PMF_NMAX:
        raise ResourceError(f"hop_pmf limited to n <= {Config.HOP_PMF_NMAX}")
    row = _hop_table(n)[n]
    return HopPmf(n=n, probs={k: float(p) for k, p in enumerate(row) if p > 0.0})


def mgf_exact(n: int, z: float) -> float:
    """E exp(z D_n) from phi_n = h/(h - z) * sum_i q*(n, i) phi_i"""
    if z >= 1:
        raise DomainError(f"the MGF of D_n diverges for z >= 1 (z={z})")
    if n < 1:
        raise DomainError("mgf_exact needs n >= 1")
    if n > Config.MEANS_NMAX:
        raise ResourceError(f"mgf_exact limited to n <= {Config.MEANS_NMAX}")
    h = _harmonic_column(n)
    phi = np.zeros(n + 1, dtype=np.longdouble)
    phi[1] = 1
    for m in range(2, n + 1):
        rate = h[m - 1]
        phi[m] = np.dot(_descent_weights(m), phi[1:m]) / (rate - z)
    return float(phi[n])


def _descent_generator(n: int) -> np.ndarray:
    """Rate matrix of the descent chain on states 1..n (row/column m-1 for state m)"""
    h = _harmonic_column(n, np.float64)
    generator = np.zeros((n, n), dtype=np.float64)
    for m in range(2, n + 1):
        generator[m - 1, :m - 1] = _descent_weights(m, np.float64)
        generator[m - 1, m - 1] = -h[m - 1]
    return generator


def height_survival(n: int, t: Any) -> Any:
    """Pr(D_n > t): mass of row n of exp(tQ) off the absorbing state 1"""
    if n < 1:
        raise DomainError("height_survival needs n >= 1")
    if n > Config.SURVIVAL_NMAX:
        raise ResourceError(f"height_survival limited to n <= {Config.SURVIVAL_NMAX}")
    times = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(times < 0):
        raise DomainError("height_survival needs t >= 0")
    survival = np.zeros(times.size)
    if n >= 2:
        transposed = _descent_generator(n).T
        start = np.zeros(n)
        start[n - 1] = 1.0
        for index, time_point in enumerate(times):
            row = expm_multiply(time_point * transposed, start)
            survival[index] = min(1.0, max(0.0, float(np.sum(row[1:]))))
    return float(survival[0]) if np.ndim(t) == 0 else survival
