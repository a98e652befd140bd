"""
Simulation Service
Seeded Monte Carlo for the harmonic descent chain, whole split trees and
the clade of leaf 1. Every substream owns a PCG64 generator derived from
(seed, stream index); partial statistics are merged in stream order, so
results do not depend on the number of worker processes.
"""
import logging
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from multiprocessing import Pool
from typing import Any, Dict, List, Optional, Set, Tuple

import numpy as np
import pandas as pd

from config import Config
from errors import DomainError, ResourceError
from models.simulation import SimConfig, SimMode, SummaryStats
from services.specfun import CONSTANTS, EULER_GAMMA, digamma, harmonic

logger = logging.getLogger(__name__)

MU = 1 / CONSTANTS.zeta2
SIGMA2 = 2 * CONSTANTS.zeta3 / CONSTANTS.zeta2 ** 3


def stream_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@lru_cache(maxsize=1)
def _prefix_table() -> np.ndarray:
    """Cumulative harmonic sums h_0 .. h_cutoff"""
    table = harmonic(np.arange(Config.SIM_HARMONIC_CUTOFF + 1))
    table.setflags(write=False)
    return table


def _exponential(rng: np.random.Generator, rate: Any) -> Any:
    # U in (0, 1] keeps the logarithm finite
    u = 1.0 - rng.random(np.shape(rate))
    return -np.log(u) / rate


def sample_harmonic(m: Any, rng: np.random.Generator) -> Any:
    """J in 1..m with Pr(J = j) = (1/j)/h_m, elementwise for arrays"""
    sizes = np.asarray(m, dtype=np.int64)
    scalar = sizes.ndim == 0
    sizes = np.atleast_1d(sizes)
    if sizes.size and sizes.min() < 1:
        raise DomainError("sample_harmonic needs m >= 1")
    table = _prefix_table()
    target = (1.0 - rng.random(sizes.shape)) * harmonic(sizes)
    out = np.searchsorted(table, target, side='left').astype(np.int64)

    beyond = target > table[-1]
    if beyond.any():
        # invert h_j ~ log j + gamma + 1/(2j), then scan for the first h_j >= target
        guess = np.floor(np.exp(target[beyond] - EULER_GAMMA) - 0.5).astype(np.int64)
        candidates = guess[:, None] + np.arange(-2, 3)[None, :]
        candidates = np.clip(candidates, 1, sizes[beyond][:, None])
        hit = harmonic(candidates) >= target[beyond][:, None]
        first = np.argmax(hit, axis=1)
        chosen = candidates[np.arange(candidates.shape[0]), first]
        out[beyond] = np.where(hit.any(axis=1), chosen, sizes[beyond])

    out = np.clip(out, 1, sizes)
    return int(out[0]) if scalar else out


def sample_split(m: Any, rng: np.random.Generator) -> Any:
    """Smaller-or-larger child size i ~ q(m, .) from the harmonic mixture"""
    sizes = np.asarray(m, dtype=np.int64)
    if sizes.size and sizes.min() < 2:
        raise DomainError("sample_split needs m >= 2")
    j = sample_harmonic(sizes - 1, rng)
    heads = rng.random(sizes.shape) < 0.5
    out = np.where(heads, j, sizes - j)
    return int(out) if sizes.ndim == 0 else out


def simulate_chain(n: int, rng: np.random.Generator) -> Tuple[float, int, Set[int]]:
    """One run of the descent chain from n to 1: (height, hop count, visited states)"""
    if n < 1:
        raise DomainError("simulate_chain needs n >= 1")
    state, height, hops = n, 0.0, 0
    visited = {n}
    while state > 1:
        height += float(_exponential(rng, harmonic(state - 1)))
        state -= sample_harmonic(state - 1, rng)
        hops += 1
        visited.add(state)
    return height, hops, visited


def simulate_chains(n: int, count: int, rng: np.random.Generator,
                    track_states: Tuple[int, ...] = ()
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """count independent chains advanced together; visits[:, k] flags track_states[k]"""
    if n < 1:
        raise DomainError("simulate_chains needs n >= 1")
    state = np.full(count, n, dtype=np.int64)
    height = np.zeros(count)
    hops = np.zeros(count, dtype=np.int64)
    tracked = np.asarray(track_states, dtype=np.int64)
    visits = state[:, None] == tracked[None, :]
    active = np.flatnonzero(state > 1)
    while active.size:
        m = state[active]
        height[active] += _exponential(rng, harmonic(m - 1))
        state[active] = m - sample_harmonic(m - 1, rng)
        hops[active] += 1
        visits[active] |= state[active][:, None] == tracked[None, :]
        active = active[state[active] > 1]
    return height, hops, visits


def simulate_tree(n: int, rng: np.random.Generator) -> Tuple[float, float]:
    """Total length and the sum of leaf heights of one tree on n leaves"""
    length, leaf_heights = simulate_trees(n, 1, rng)
    return float(length[0]), float(leaf_heights[0])


def simulate_trees(n: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Grow count trees generation by generation on one frontier of live clades"""
    if n < 2:
        raise DomainError("simulate_trees needs n >= 2")
    if n * count > Config.SIM_TREE_CLADE_BUDGET:
        raise ResourceError(f"{count} trees on {n} leaves exceed the clade budget "
                            f"{Config.SIM_TREE_CLADE_BUDGET}")
    length = np.zeros(count)
    leaf_heights = np.zeros(count)
    tree = np.arange(count, dtype=np.int64)
    size = np.full(count, n, dtype=np.int64)
    birth = np.zeros(count)
    while tree.size:
        lifetime = _exponential(rng, harmonic(size - 1))
        length += np.bincount(tree, weights=lifetime, minlength=count)
        left = sample_split(size, rng)
        split_time = birth + lifetime
        tree = np.concatenate((tree, tree))
        size = np.concatenate((left, size - left))
        birth = np.concatenate((split_time, split_time))
        leaf = size == 1
        leaf_heights += np.bincount(tree[leaf], weights=birth[leaf], minlength=count)
        tree, size, birth = tree[~leaf], size[~leaf], birth[~leaf]
    return length, leaf_heights


def clade_fraction(n: int, t: float, rng: np.random.Generator) -> float:
    return float(clade_fractions(n, t, 1, rng)[0])


def clade_fractions(n: int, t: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """K/n for the clade of leaf 1 at time t, count independent runs"""
    if n < 1:
        raise DomainError("clade_fractions needs n >= 1")
    if t < 0:
        raise DomainError("clade_fractions needs t >= 0")
    state = np.full(count, n, dtype=np.int64)
    clock = np.zeros(count)
    active = np.flatnonzero(state > 1) if t > 0 else np.empty(0, dtype=np.int64)
    while active.size:
        m = state[active]
        clock[active] += _exponential(rng, harmonic(m - 1))
        jumped = clock[active] <= t
        movers = active[jumped]
        state[movers] = state[movers] - sample_harmonic(state[movers] - 1, rng)
        active = movers[state[movers] > 1]
    return state / n


def paintbox_height_tail(n: int, t: float, count: int, rng: np.random.Generator,
                         proxy_size: Optional[int] = None) -> np.ndarray:
    """Samples of 1 - (1 - P)^(n-1), P the clade frequency of leaf 1 at time t"""
    if n < 1:
        raise DomainError("paintbox_height_tail needs n >= 1")
    proxy_size = proxy_size or Config.PAINTBOX_PROXY_SIZE
    if proxy_size < n:
        raise DomainError(f"proxy tree of {proxy_size} leaves is smaller than n={n}")
    frequencies = clade_fractions(proxy_size, t, count, rng)
    if n == 1:
        return np.zeros(count)
    # a clade holding the whole proxy tree gives log1p(-1) = -inf and a value of 1
    with np.errstate(divide="ignore"):
        return -np.expm1((n - 1) * np.log1p(-frequencies))


def paintbox_moment(s: float, t: float) -> float:
    """Limit of E[(K/n)^s] at time t"""
    return math.exp(-t * (float(digamma(1.0 + s)) + EULER_GAMMA))


@dataclass
class _Moments:
    count: int
    mean: float
    m2: float
    low: float
    high: float

    @classmethod
    def of(cls, values: np.ndarray) -> '_Moments':
        values = np.asarray(values, dtype=np.float64)
        mean = float(values.mean())
        return cls(values.size, mean, float(np.sum((values - mean) ** 2)),
                   float(values.min()), float(values.max()))

    def merge(self, other: '_Moments') -> '_Moments':
        total = self.count + other.count
        delta = other.mean - self.mean
        return _Moments(
            count=total,
            mean=self.mean + delta * other.count / total,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / total,
            low=min(self.low, other.low),
            high=max(self.high, other.high),
        )

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count)


def _tree_chunks(n: int, size: int) -> List[int]:
    chunk = max(1, Config.SIM_TREE_CLADE_BUDGET // n)
    return [min(chunk, size - start) for start in range(0, size, chunk)]


def _run_stream(task: Tuple[SimConfig, int, int, bool]) -> Dict[str, Any]:
    config, index, size, keep = task
    rng = stream_rng(config.seed, index)
    columns: Dict[str, np.ndarray] = {}
    if config.mode is SimMode.CHAIN:
        height, hops, visits = simulate_chains(config.n, size, rng, config.track_states)
        columns = {'d': height, 'hops': hops}
        log_n = math.log(config.n) if config.n > 1 else 0.0
        partial = {
            'primary': _Moments.of(height),
            'secondary': _Moments.of(hops),
            'tails': np.array([np.count_nonzero(height > x * log_n) for x in config.x_grid]),
            'visits': visits.sum(axis=0),
        }
    elif config.mode is SimMode.TREE:
        parts = [simulate_trees(config.n, chunk, rng) for chunk in _tree_chunks(config.n, size)]
        length = np.concatenate([p[0] for p in parts])
        mean_height = np.concatenate([p[1] for p in parts]) / config.n
        columns = {'mean_leaf_height': mean_height, 'length': length}
        partial = {'primary': _Moments.of(mean_height), 'secondary': _Moments.of(length)}
    else:
        fraction = clade_fractions(config.n, config.t, size, rng)
        columns = {'fraction': fraction}
        partial = {
            'primary': _Moments.of(fraction),
            'powers': [_Moments.of(fraction ** s) for s in config.powers],
        }
    if keep:
        frame = pd.DataFrame(columns)
        frame.insert(0, 'stream', index)
        partial['samples'] = frame
    return partial


def _merge(partials: List[Dict[str, Any]]) -> Dict[str, Any]:
    merged = dict(partials[0])
    for part in partials[1:]:
        merged['primary'] = merged['primary'].merge(part['primary'])
        if 'secondary' in part:
            merged['secondary'] = merged['secondary'].merge(part['secondary'])
        if 'tails' in part:
            merged['tails'] = merged['tails'] + part['tails']
            merged['visits'] = merged['visits'] + part['visits']
        if 'powers' in part:
            merged['powers'] = [a.merge(b) for a, b in zip(merged['powers'], part['powers'])]
    return merged


def _chain_extra(config: SimConfig, merged: Dict[str, Any]) -> Dict[str, Any]:
    primary = merged['primary']
    count = primary.count
    freqs = [int(c) / count for c in merged['tails']]
    extra: Dict[str, Any] = {
        'hops_mean': merged['secondary'].mean,
        'x_grid': list(config.x_grid),
        'tail_counts': [int(c) for c in merged['tails']],
        'tail_freqs': freqs,
        'track_states': list(config.track_states),
        'visit_counts': [int(c) for c in merged['visits']],
        'visit_freqs': [int(c) / count for c in merged['visits']],
    }
    if config.n > 1:
        log_n = math.log(config.n)
        scale = math.sqrt(SIGMA2 * log_n)
        extra['clt_standardized_mean'] = (primary.mean - MU * log_n) / scale
        extra['clt_standardized_variance'] = primary.variance / scale ** 2
        extra['tail_exponents'] = [-math.log(f) / log_n if f > 0 else math.inf for f in freqs]
    return extra


def run(config: SimConfig, threads: Optional[int] = None,
        dump: Optional[str] = None) -> SummaryStats:
    """Deterministic given (seed, streams); threads only changes wall time"""
    threads = threads or Config.THREADS
    sizes = config.stream_sizes()
    tasks = [(config, index, size, dump is not None) for index, size in enumerate(sizes)]
    started = time.perf_counter()
    logger.info("simulate mode=%s n=%d samples=%d streams=%d threads=%d",
                config.mode.value, config.n, config.samples, config.streams, threads)
    workers = min(threads, len(tasks))
    if workers > 1:
        with Pool(processes=workers) as pool:
            partials = pool.map(_run_stream, tasks)
    else:
        partials = [_run_stream(task) for task in tasks]

    merged = _merge(partials)
    primary = merged['primary']
    extra: Dict[str, Any] = {'mode': config.mode.value, 'n': config.n, 'seed': config.seed,
                             'streams': config.streams}
    if config.mode is SimMode.CHAIN:
        extra.update(_chain_extra(config, merged))
    elif config.mode is SimMode.TREE:
        length = merged['secondary']
        extra.update({'length_mean': length.mean, 'length_variance': length.variance,
                      'length_stderr': length.stderr})
    else:
        extra.update({
            't': config.t,
            'powers': list(config.powers),
            'power_moments': [m.mean for m in merged['powers']],
            'power_stderr': [m.stderr for m in merged['powers']],
            'paintbox_targets': [paintbox_moment(s, config.t) for s in config.powers],
        })

    if dump is not None:
        pd.concat([p['samples'] for p in partials], ignore_index=True).to_csv(dump, index=False)
        logger.info("raw samples written to %s", dump)
    logger.info("simulation finished in %.2fs", time.perf_counter() - started)
    return SummaryStats(count=primary.count, mean=primary.mean, variance=primary.variance,
                        stderr=primary.stderr, min=primary.low, max=primary.high, extra=extra)
