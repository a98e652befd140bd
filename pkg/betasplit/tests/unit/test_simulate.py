import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from config import Config
from errors import DomainError, ResourceError
from models.simulation import SimConfig, SimMode
from services import simulate
from services.hd_exact import build_exact_tables, height_survival
from services.simulate import (
    clade_fraction,
    clade_fractions,
    paintbox_height_tail,
    paintbox_moment,
    run,
    sample_harmonic,
    sample_split,
    simulate_chain,
    simulate_chains,
    simulate_tree,
    simulate_trees,
    stream_rng,
)
from services.specfun import harmonic


@pytest.fixture
def rng():
    return stream_rng(20240611, 0)


@pytest.fixture(scope='module')
def tables():
    return build_exact_tables(200, 2, 200)


def _within(sample_mean, target, stderr, sigmas=4.0):
    return abs(sample_mean - target) <= sigmas * stderr


def test_streams_are_reproducible_and_distinct():
    first = stream_rng(7, 0).random(4)
    assert np.array_equal(first, stream_rng(7, 0).random(4))
    assert not np.array_equal(first, stream_rng(7, 1).random(4))


def test_sample_harmonic_small_sizes(rng):
    assert sample_harmonic(1, rng) == 1
    draws = sample_harmonic(np.full(100_000, 2), rng)
    ones = np.mean(draws == 1)
    assert set(np.unique(draws)) == {1, 2}
    assert _within(ones, 2 / 3, math.sqrt(2 / 9 / draws.size))


def test_sample_harmonic_closed_form_branch_matches_table(monkeypatch):
    sizes = np.full(5000, 400)
    expected = sample_harmonic(sizes, stream_rng(11, 3))
    monkeypatch.setattr(Config, 'SIM_HARMONIC_CUTOFF', 50)
    simulate._prefix_table.cache_clear()
    try:
        inverted = sample_harmonic(sizes, stream_rng(11, 3))
    finally:
        monkeypatch.undo()
        simulate._prefix_table.cache_clear()
    assert np.array_equal(expected, inverted)


def test_sample_split_kernel(rng):
    assert sample_split(2, rng) == 1
    draws = sample_split(np.full(200_000, 4), rng)
    for size, p in ((1, 4 / 11), (2, 3 / 11), (3, 4 / 11)):
        freq = np.mean(draws == size)
        assert _within(freq, p, math.sqrt(p * (1 - p) / draws.size))


def test_single_chain(rng):
    assert simulate_chain(1, rng) == (0.0, 0, {1})
    height, hops, visited = simulate_chain(50, rng)
    assert height > 0
    assert {1, 50} <= visited
    assert hops == len(visited) - 1


def test_chains_match_exact_means(rng, tables):
    height, hops, visits = simulate_chains(200, 40_000, rng, (2, 3))
    assert _within(height.mean(), tables.mean_D(200), height.std(ddof=1) / math.sqrt(height.size))
    assert _within(hops.mean(), float(tables.mean_L[200]), hops.std(ddof=1) / math.sqrt(hops.size))
    for column, j in enumerate((2, 3)):
        p = tables.a(200, j)
        freq = visits[:, column].mean()
        assert _within(freq, p, math.sqrt(p * (1 - p) / visits.shape[0]))


def test_two_leaf_chain_is_exponential(rng):
    height, hops, _ = simulate_chains(2, 50_000, rng)
    assert np.all(hops == 1)
    assert _within(height.mean(), 1.0, 1.0 / math.sqrt(height.size))


def test_trees_match_exact_means(rng, tables):
    length, leaf_heights = simulate_trees(50, 4000, rng)
    mean_height = leaf_heights / 50
    assert _within(length.mean(), float(tables.mean_length[50]),
                   length.std(ddof=1) / math.sqrt(length.size))
    assert _within(mean_height.mean(), tables.mean_D(50),
                   mean_height.std(ddof=1) / math.sqrt(mean_height.size))


def test_two_leaf_tree(rng):
    length, leaf_heights = simulate_tree(2, rng)
    assert abs(leaf_heights - 2 * length) < 1e-12


def test_tree_budget(rng):
    with pytest.raises(ResourceError):
        simulate_trees(10 ** 6, 10, rng)
    with pytest.raises(DomainError):
        simulate_trees(1, 10, rng)


def test_clade_fraction(rng):
    assert clade_fraction(1000, 0.0, rng) == 1.0
    fractions = clade_fractions(10 ** 6, 1.0, 20_000, rng)
    assert np.all((fractions > 0) & (fractions <= 1))
    assert abs(paintbox_moment(1.0, 1.0) - math.exp(-1.0)) < 1e-14
    stderr = fractions.std(ddof=1) / math.sqrt(fractions.size)
    assert _within(fractions.mean(), paintbox_moment(1.0, 1.0), stderr)
    with pytest.raises(DomainError):
        clade_fractions(10, -1.0, 5, rng)


def test_run_is_deterministic_and_stream_sized():
    config = SimConfig(n=100, samples=1001, seed=42, streams=4)
    first = run(config, threads=1)
    second = run(config, threads=1)
    assert first.to_dict() == second.to_dict()
    assert first.count == 1001
    assert first.stderr == pytest.approx(math.sqrt(first.variance / first.count))
    assert first.extra['mode'] == 'chain'
    assert len(first.extra['visit_freqs']) == len(config.track_states)
    assert all(0.0 <= f <= 1.0 for f in first.extra['tail_freqs'])


def test_run_does_not_depend_on_worker_count():
    config = SimConfig(n=60, samples=600, seed=9, streams=3)
    assert run(config, threads=1).to_dict() == run(config, threads=3).to_dict()


def test_run_tree_and_clade_modes():
    tree = run(SimConfig(n=20, samples=200, seed=1, streams=2, mode=SimMode.TREE), threads=1)
    assert tree.extra['length_mean'] > 0
    assert 'length_stderr' in tree.extra

    config = SimConfig(n=1000, samples=300, seed=2, streams=3, mode='clade_fraction', t=0.5)
    clade = run(config, threads=1)
    assert clade.extra['powers'] == [1.0, 1.5, 2.0]
    assert len(clade.extra['power_moments']) == 3
    assert clade.extra['paintbox_targets'][0] == pytest.approx(math.exp(-0.5))


def test_run_dump_writes_samples(tmp_path):
    path = tmp_path / 'samples.csv'
    run(SimConfig(n=30, samples=50, seed=3, streams=2), threads=1, dump=str(path))
    frame = pd.read_csv(path)
    assert len(frame) == 50
    assert list(frame.columns) == ['stream', 'd', 'hops']
    assert sorted(frame['stream'].unique()) == [0, 1]


def test_sim_config_validation():
    with pytest.raises(DomainError):
        SimConfig(n=10, samples=5, seed=1, streams=6)
    with pytest.raises(DomainError):
        SimConfig(n=10, samples=5, seed=-1, streams=1)
    with pytest.raises(DomainError):
        SimConfig(n=1, samples=5, seed=1, streams=1, mode='tree')
    assert SimConfig(n=10, samples=10, seed=1, streams=3).stream_sizes() == (4, 3, 3)


def test_sample_harmonic_goodness_of_fit(rng):
    m = 100
    draws = sample_harmonic(np.full(200_000, m), rng)
    probs = (1.0 / np.arange(1, m + 1)) / harmonic(m)
    observed = np.bincount(draws, minlength=m + 1)[1:]
    assert observed.sum() == draws.size
    assert stats.chisquare(observed, probs * draws.size).pvalue > 1e-4


def test_chain_and_tree_heights_agree():
    n = 30
    height, _, _ = simulate_chains(n, 20_000, stream_rng(1729, 0))
    _, leaf_heights = simulate_trees(n, 2_000, stream_rng(1729, 1))
    tree_height = leaf_heights / n
    combined = math.hypot(height.std(ddof=1) / math.sqrt(height.size),
                          tree_height.std(ddof=1) / math.sqrt(tree_height.size))
    assert _within(height.mean(), tree_height.mean(), combined, sigmas=5.0)


@pytest.mark.parametrize('power, t', [(2.0, 0.5), (1.5, 2.0)])
def test_paintbox_power_moments(power, t):
    n_big = 10 ** 6
    fractions = clade_fractions(n_big, t, 20_000, stream_rng(8128, int(10 * power)))
    moments = fractions ** power
    stderr = moments.std(ddof=1) / math.sqrt(moments.size)
    gap = max(0.0, abs(moments.mean() - paintbox_moment(power, t)) - 1.0 / n_big)
    assert gap <= 4.0 * stderr


def test_paintbox_height_tail_matches_the_chain_tail():
    n, t = 10, 1.0
    draws = paintbox_height_tail(n, t, 20_000, stream_rng(2718, 0))
    assert np.all((draws >= 0.0) & (draws <= 1.0))
    stderr = draws.std(ddof=1) / math.sqrt(draws.size)
    gap = max(0.0, abs(draws.mean() - height_survival(n, t)) - (n - 1) / 10 ** 6)
    assert gap <= 4.0 * stderr


def test_paintbox_height_tail_limits(rng):
    assert np.array_equal(paintbox_height_tail(1, 1.0, 5, rng, proxy_size=100), np.zeros(5))
    assert np.all(paintbox_height_tail(4, 0.0, 5, rng, proxy_size=100) == 1.0)
    with pytest.raises(DomainError):
        paintbox_height_tail(0, 1.0, 5, rng)
    with pytest.raises(DomainError):
        paintbox_height_tail(50, 1.0, 5, rng, proxy_size=10)
