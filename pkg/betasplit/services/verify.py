"""
Verification Service
Builds the cross-method verify suites: each row compares exact tables,
line integrals, closed forms, expansions or simulations on an n grid and
records whether it met its tolerance.
"""
import json
import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np
from scipy import integrate, stats

from config import Config
from errors import DomainError
from models.expansions import ContourSpec
from models.reports import VerifyReport, VerifyRow
from models.simulation import SimConfig, SimMode
from services.asympt import (
    a_limit,
    ed_expansion,
    el_expansion,
    expansion_constants,
    length_expansion,
    moment_expansion,
    moment_residue,
    var_d_approx,
)
from services.hd_exact import (
    alt_sum_ED,
    build_exact_tables,
    build_kernel,
    height_survival,
    hop_pmf,
    mgf_exact,
    occupancy_closed_form,
    occupancy_column,
)
from services.mellin import (
    line_expectation,
    line_mgf,
    mellin_fn,
    mellin_Hn,
    mellin_lambda,
    transform_integrand,
)
from services.mgf_ldp import clt_params, mgf_approx, rate_function, sigma_star, x_one, x_zero
from services.simulate import (
    paintbox_height_tail,
    paintbox_moment,
    run,
    sample_split,
    stream_rng,
)
from services.specfun import CONSTANTS, default_root_table, harmonic, polygamma

logger = logging.getLogger(__name__)

SUITES = ('core', 'expansions', 'mellin', 'simulation')
RATE_GRID = (100, 200, 400, 800, 1600, 3200)
OCCUPANCY_GRID = (200, 400, 800, 1600, 3200)
MGF_POINTS = (-2.0, -0.5, 0.3, 0.7)
MELLIN_GRID = (2, 5, 10, 50, 100)
CONTOUR_SIGMAS = (-0.8, -0.5, -0.2)
TRANSFORM_POINTS = (0.5, 1.5, 2 + 1j)
TAIL_TIMES = (0.5, 1.0, 2.0)

# pre-registered seeds of the simulation suite
KERNEL_SEED = 20240611
OCCUPANCY_SEED = 5501
PAINTBOX_SEED = 8128
CONSISTENCY_SEED = 1729
CLT_SEED = 314159
TAIL_SEED = 2718


def _row(quantity: str, n_grid: Sequence[float], values: Dict[str, List[float]],
         tolerance: float, kind: str = 'abs', deltas: Optional[Dict[str, List[float]]] = None,
         scaled_errors: Optional[List[float]] = None,
         error_order: Optional[float] = None) -> VerifyRow:
    row = VerifyRow(
        quantity=quantity,
        n_grid=[float(n) for n in n_grid],
        values={k: [float(v) for v in vs] for k, vs in values.items()},
        tolerance=tolerance,
        kind=kind,
        deltas={k: [float(d) for d in ds] for k, ds in (deltas or {}).items()},
        scaled_errors=[float(e) for e in (scaled_errors or [])],
        error_order=error_order,
    )
    row.recompute()
    return row


def _agreement(quantity: str, n_grid: Sequence[float], reference: Sequence[float],
               others: Dict[str, Sequence[float]], tolerance: float,
               reference_name: str = 'exact', relative: bool = False) -> VerifyRow:
    values = {reference_name: list(reference), **{k: list(v) for k, v in others.items()}}
    deltas = {}
    for name, column in others.items():
        deltas[name] = [(v - r) / abs(r) if relative else v - r
                        for v, r in zip(column, reference)]
    return _row(quantity, n_grid, values, tolerance, deltas=deltas)


def _mp(x: np.longdouble) -> mpmath.mpf:
    return mpmath.mpf(np.format_float_positional(np.longdouble(x), unique=True))


def _rate_row(quantity: str, n_grid: Sequence[int], exact: Sequence[float],
              approx: Sequence[float], scale: Callable[[int], float],
              error_order: Optional[float]) -> VerifyRow:
    errors = [a - e for a, e in zip(approx, exact)]
    scaled = [abs(err) * scale(n) for err, n in zip(errors, n_grid)]
    return _row(quantity, n_grid, {'exact': exact, 'expansion': approx}, 5.0, kind='spread',
                deltas={'expansion': errors}, scaled_errors=scaled, error_order=error_order)


def _schema_row() -> VerifyRow:
    """Round trip of a report through the JSON encoder"""
    sample = VerifyReport('schema', [_row('sample', [2, 3], {'exact': [1.0, 4 / 3]}, 0.0,
                                         deltas={'line': [0.0, 0.0]})])
    encoded = json.dumps(sample.to_dict(), sort_keys=True)
    decoded = VerifyReport.from_dict(json.loads(encoded))
    mismatch = 0.0 if decoded.to_dict() == sample.to_dict() else 1.0
    return _row('report_schema_roundtrip', [0], {'mismatch': [mismatch]}, 0.0, kind='bound')


def core_suite() -> List[VerifyRow]:
    rows: List[VerifyRow] = []
    roots = default_root_table()
    rows.append(_agreement('psi_roots', [1, 2], [-0.567, -1.628],
                           {'computed': [roots.root(1), roots.root(2)]}, 5e-4,
                           reference_name='reference'))

    constants = expansion_constants(roots)
    mu, sigma2 = clt_params()
    for name, computed, reference, tol in (
            ('c0', constants['c0'], 0.795155660439, 5e-11),
            ('b0', constants['b0'], 0.78234, 5e-6),
            ('mu', mu, 0.6079, 5e-5),
            ('sigma2', sigma2, 0.5401, 5e-5),
            ('sigma_star', sigma_star(), 1.457, 5e-4),
            ('pole1_coefficient', constants['pole1_coefficient'], -0.0943, 5e-5)):
        rows.append(_agreement(name, [0], [reference], {'computed': [computed]}, tol,
                               reference_name='reference'))

    tables = build_exact_tables(40, 2, occupancy_nmax=40)
    rows.append(_agreement('E[D_3]', [3], [4 / 3], {
        'recurrence': [tables.mean_D(3)],
        'alternating_sum': [alt_sum_ED(3, 30)],
        'line_integral': [line_expectation('ED', 3)],
    }, 1e-7, reference_name='hand'))
    rows.append(_agreement('E[D_3^2]', [3], [28 / 9], {
        'recurrence': [float(tables.moments_D[2, 3])],
        'line_integral': [line_expectation('MomentK', 3, k=2)],
    }, 1e-7, reference_name='hand'))
    rows.append(_agreement('E[L_3]', [3], [5 / 3], {
        'recurrence': [float(tables.mean_L[3])],
        'line_integral': [line_expectation('EL', 3)],
    }, 1e-7, reference_name='hand'))
    rows.append(_agreement('E[Lambda_3]', [3], [5 / 3], {
        'recurrence': [float(tables.mean_length[3])],
        'line_integral': [line_expectation('ELambda', 3)],
    }, 1e-7, reference_name='hand'))
    rows.append(_agreement('a(3,2)', [3], [2 / 3], {
        'recurrence': [tables.a(3, 2)],
        'closed_form': [occupancy_closed_form(3, 2, 30)],
    }, 1e-7, reference_name='hand'))

    grid = list(range(2, 41))
    h = harmonic(np.arange(41))
    weighted = [sum(tables.a(n, j) / h[j - 1] for j in range(2, n + 1)) for n in grid]
    rows.append(_agreement('E[D_n]=sum a(n,j)/h_(j-1)', grid, [tables.mean_D(n) for n in grid],
                           {'occupancy_sum': weighted}, 1e-10))
    rows.append(_agreement('E[L_n]=sum a(n,j)', grid, [float(tables.mean_L[n]) for n in grid],
                           {'occupancy_sum': [sum(tables.a(n, j) for j in range(2, n + 1))
                                              for n in grid]}, 1e-10))
    rows.append(_agreement('E[D_n] alternating sum', grid, [tables.mean_D(n) for n in grid],
                           {'alternating_sum': [alt_sum_ED(n, 30) for n in grid]}, 1e-12))
    for j in (2, 3, 5, 10):
        sub = list(range(j, 41))
        rows.append(_agreement(f'a(n,{j}) closed form', sub, [tables.a(n, j) for n in sub],
                               {'closed_form': [occupancy_closed_form(n, j, 30) for n in sub]},
                               1e-12))

    pmf = hop_pmf(40)
    rows.append(_agreement('hop_pmf(40)', [40, 40], [1.0, float(tables.mean_L[40])],
                           {'pmf': [sum(pmf.probs.values()), pmf.mean]}, 1e-10))
    kernel = build_kernel(4)
    rows.append(_agreement('q(4, .)', [1, 2, 3], [4 / 11, 3 / 11, 4 / 11],
                           {'kernel': list(kernel.split_probs)}, 1e-15, reference_name='hand'))

    rows.extend(_ldp_rows())
    rows.append(_schema_row())
    return rows


def _ldp_rows() -> List[VerifyRow]:
    rows = [_agreement('rate_function(x0)', [x_zero()], [0.0],
                       {'lambda_star': [rate_function(x_zero()).lambda_star]}, 1e-12,
                       reference_name='zero')]
    linear = list(np.linspace(x_one(), 3.0, 9))
    rows.append(_agreement('rate_function linear branch', linear, [x - 1.0 for x in linear],
                           {'lambda_star': [rate_function(x).lambda_star for x in linear]}, 1e-10,
                           reference_name='x-1'))
    xs = np.linspace(0.05, 3.0, 60)
    values = np.array([rate_function(x).lambda_star for x in xs])
    # convexity: every midpoint lies below its chord
    violation = float(np.max(values[1:-1] - 0.5 * (values[:-2] + values[2:])))
    rows.append(_row('rate_function convexity', [0.05, 3.0], {'chord_violation': [violation]},
                     1e-12, kind='bound'))
    return rows


def expansions_suite() -> List[VerifyRow]:
    rows: List[VerifyRow] = []
    roots = default_root_table()
    nmax = max(RATE_GRID)
    tables = build_exact_tables(nmax, 3, occupancy_nmax=0)

    with mpmath.workdps(30):
        for quantity, expansion, column, N in (
                ('E[D_n]', ed_expansion, tables.moments_D[1], 2),
                ('E[L_n]', el_expansion, tables.mean_L, 2),
                ('E[Lambda_n]', length_expansion, tables.mean_length, 1)):
            exact, approx, errors = [], [], []
            order = None
            for n in RATE_GRID:
                value = expansion(n, N, roots, dps=30)
                order = value.error_order
                error = value.value - _mp(column[n])
                exact.append(float(column[n]))
                approx.append(float(value.value))
                errors.append(float(error))
            scaled = [abs(e) * n ** (-order) for e, n in zip(errors, RATE_GRID)]
            rows.append(_row(f'{quantity} rate N={N}', RATE_GRID,
                             {'exact': exact, 'expansion': approx}, 5.0, kind='spread',
                             deltas={'expansion': errors}, scaled_errors=scaled,
                             error_order=order))

    rows.append(_rate_row('var[D_n] rate', RATE_GRID,
                          [tables.variance_D(n) for n in RATE_GRID],
                          [var_d_approx(n) for n in RATE_GRID],
                          lambda n: n / math.log(n), None))
    exponent = 1 + roots.abs_root(1)
    for j in (2, 3, 5):
        column = occupancy_column(j, max(OCCUPANCY_GRID))
        rows.append(_rate_row(f'a(n,{j}) rate', OCCUPANCY_GRID,
                              [column[n] for n in OCCUPANCY_GRID],
                              [a_limit(j)] * len(OCCUPANCY_GRID),
                              lambda n: n ** exponent, -exponent))

    zeta2, zeta3 = CONSTANTS.zeta2, CONSTANTS.zeta3
    grid = (10, 100, 1000)
    hs = [harmonic(n - 1) for n in grid]
    rows.append(_agreement('moment_residue k=1 pole 0', grid,
                           [h / zeta2 + zeta3 / zeta2 ** 2 for h in hs],
                           {'residue_engine': [moment_residue(1, 0, n, roots) for n in grid]},
                           1e-10, reference_name='closed_form'))
    rows.append(_agreement('moment_residue k=2 pole 0', grid, [
        h ** 2 / zeta2 ** 2 + 4 * zeta3 * h / zeta2 ** 3 + 6 * zeta3 ** 2 / zeta2 ** 4
        - 18 / (5 * math.pi ** 2) - float(polygamma(1, n)) / zeta2 ** 2
        for h, n in zip(hs, grid)],
        {'residue_engine': [moment_residue(2, 0, n, roots) for n in grid]},
        1e-10, reference_name='closed_form'))
    rows.append(_agreement('moment_expansion(1) = ed_expansion', RATE_GRID,
                           [ed_expansion(n, 2, roots).value for n in RATE_GRID],
                           {'moment_expansion': [moment_expansion(1, n, 2, roots).value
                                                 for n in RATE_GRID]}, 1e-12,
                           reference_name='ed_expansion'))
    rows.append(_agreement('E[D_n^3]', [2000], [float(tables.moments_D[3, 2000])],
                           {'moment_expansion': [moment_expansion(3, 2000, 2, roots).value]},
                           1e-4, relative=True))
    rows.append(_agreement('E[L_n] n=2000', [2000], [float(tables.mean_L[2000])],
                           {'expansion': [el_expansion(2000, 2, roots).value]}, 1e-6,
                           relative=True))

    errors = [abs(length_expansion(1000, N, roots).value - float(tables.mean_length[1000]))
              for N in (0, 1)]
    rows.append(_row('length_expansion N=1 gain', [1000], {'error_ratio': [errors[1] / errors[0]]},
                     0.1, kind='bound'))

    # relative deviation scaled by n^-error_order; the bound constant is recorded
    scaled = []
    for z in MGF_POINTS:
        approx, order = mgf_approx(2000, z)
        exact = mgf_exact(2000, z)
        scaled.append(abs(approx - exact) / abs(exact) * 2000 ** (-order))
    rows.append(_row('mgf_approx n=2000 scaled deviation', MGF_POINTS, {'scaled': scaled},
                     100.0, kind='bound'))
    return rows


def _quad_transform(kind: str, n: int, s: complex) -> complex:
    """Mellin transform of transform_integrand(kind, n) at s by adaptive quadrature"""
    func = transform_integrand(kind, n)
    options = dict(epsabs=1e-13, epsrel=1e-12, limit=200)
    real = integrate.quad(lambda x: (x ** (s - 1) * func(x)).real, 0.0, 1.0, **options)[0]
    imag = integrate.quad(lambda x: (x ** (s - 1) * func(x)).imag, 0.0, 1.0, **options)[0]
    return complex(real, imag)


def mellin_suite() -> List[VerifyRow]:
    rows: List[VerifyRow] = []
    roots = default_root_table()
    tables = build_exact_tables(max(MELLIN_GRID), 2, occupancy_nmax=0)
    tail = [n for n in MELLIN_GRID if n >= 50]
    for kind, column, expansion in (
            ('ED', tables.moments_D[1], ed_expansion),
            ('EL', tables.mean_L, el_expansion),
            ('ELambda', tables.mean_length, length_expansion)):
        exact = [float(column[n]) for n in MELLIN_GRID]
        line = [line_expectation(kind, n) for n in MELLIN_GRID]
        rows.append(_agreement(f'{kind} exact vs line', MELLIN_GRID, exact,
                               {'line_integral': line}, 1e-7))
        approx = [expansion(n, 2, roots) for n in tail]
        scaled = [abs(float(a.value) - float(column[n])) / max(1e-7, n ** a.error_order)
                  for a, n in zip(approx, tail)]
        rows.append(_row(f'{kind} exact vs expansion', tail,
                         {'scaled_error': scaled}, 100.0, kind='bound',
                         deltas={'expansion': [float(a.value) - float(column[n])
                                               for a, n in zip(approx, tail)]},
                         error_order=approx[-1].error_order))
    rows.append(_agreement('E[D_n^2] line', MELLIN_GRID,
                           [float(tables.moments_D[2, n]) for n in MELLIN_GRID],
                           {'line_integral': [line_expectation('MomentK', n, k=2)
                                              for n in MELLIN_GRID]}, 1e-7))

    # the line value must not move with the abscissa inside the strip
    n = 50
    for kind in ('ED', 'EL', 'ELambda'):
        values = [line_expectation(kind, n, spec=ContourSpec.with_defaults(sigma))
                  for sigma in CONTOUR_SIGMAS]
        reference = values[CONTOUR_SIGMAS.index(-0.5)]
        rows.append(_row(f'{kind} contour independence n={n}', CONTOUR_SIGMAS,
                         {'line_integral': values}, 2 * Config.CONTOUR_ABS_TOL,
                         deltas={'sigma_shift': [v - reference for v in values]}))

    rows.append(_agreement('line_mgf n=50', MGF_POINTS, [mgf_exact(50, z) for z in MGF_POINTS],
                           {'line_integral': [line_mgf(50, z) for z in MGF_POINTS]}, 1e-7))

    labels, closed = [], {'f_n': [], 'H_n': [], 'lambda_n': []}
    for n in (2, 7):
        for s in TRANSFORM_POINTS:
            for name, kind, transform in (('f_n', 'f', mellin_fn), ('H_n', 'H', mellin_Hn),
                                          ('lambda_n', 'lambda', mellin_lambda)):
                quad = _quad_transform(kind, n, s)
                closed[name].append(abs(complex(transform(s, n)) - quad))
            labels.append(n)
    rows.append(_row('transforms vs quadrature n=2,7', labels, closed, 1e-8, kind='bound'))
    return rows


def _binned_p_value(draws: np.ndarray, probs: np.ndarray) -> float:
    """Chi-square p-value with adjacent cells merged until each expects >= 5"""
    observed = np.bincount(draws, minlength=probs.size + 1)[1:].astype(float)
    expected = probs * draws.size
    obs_bins, exp_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and exp_bins:
        obs_bins[-1] += acc_o
        exp_bins[-1] += acc_e
    return float(stats.chisquare(obs_bins, exp_bins).pvalue)


def simulation_suite(threads: Optional[int] = None) -> List[VerifyRow]:
    rows: List[VerifyRow] = []
    sizes = (3, 10, 100, 10_000)
    p_values = []
    for index, m in enumerate(sizes):
        rng = stream_rng(KERNEL_SEED, index)
        draws = sample_split(np.full(200_000, m), rng)
        p_values.append(_binned_p_value(draws, build_kernel(m).split_probs))
    rows.append(_row('split kernel chi-square', sizes, {'p_value': p_values}, 1e-3, kind='floor'))

    n = 200
    stats_chain = run(SimConfig(n=n, samples=100_000, seed=OCCUPANCY_SEED,
                                track_states=(2, 3, 4, 5, 6)), threads=threads)
    count = stats_chain.count
    targets = [occupancy_column(j, n)[n] for j in (2, 3, 4, 5, 6)]
    freqs = stats_chain.extra['visit_freqs']
    z_scores = [(f - a) / math.sqrt(a * (1 - a) / count) for f, a in zip(freqs, targets)]
    rows.append(_row('occupancy frequencies n=200', [2, 3, 4, 5, 6],
                     {'exact': targets, 'simulated': freqs}, 4.0,
                     deltas={'z_score': z_scores}))

    n_big = 1_000_000
    z_scores = []
    for (s, t) in ((1.0, 1.0), (2.0, 0.5), (1.5, 2.0)):
        result = run(SimConfig(n=n_big, samples=100_000, seed=PAINTBOX_SEED,
                               mode=SimMode.CLADE_FRACTION, t=t, powers=(s,)), threads=threads)
        moment = result.extra['power_moments'][0]
        stderr = result.extra['power_stderr'][0]
        gap = max(0.0, abs(moment - paintbox_moment(s, t)) - 1.0 / n_big)
        z_scores.append(gap / stderr)
    rows.append(_row('paintbox moments n=1e6', [1, 2, 3], {'z_score': z_scores}, 4.0,
                     deltas={'z_score': z_scores}))

    n_tail = 10
    survival = height_survival(n_tail, np.array(TAIL_TIMES))
    z_scores = []
    for index, t in enumerate(TAIL_TIMES):
        draws = paintbox_height_tail(n_tail, t, 20_000, stream_rng(TAIL_SEED, index))
        stderr = max(float(draws.std(ddof=1)) / math.sqrt(draws.size), 1e-12)
        gap = max(0.0, abs(float(draws.mean()) - survival[index]) - (n_tail - 1) / n_big)
        z_scores.append(gap / stderr)
    rows.append(_row(f'paintbox height tail n={n_tail}', TAIL_TIMES,
                     {'exact': list(survival), 'z_score': z_scores}, 4.0,
                     deltas={'z_score': z_scores}))

    n = 300
    chain = run(SimConfig(n=n, samples=20_000, seed=CONSISTENCY_SEED), threads=threads)
    tree = run(SimConfig(n=n, samples=2_000, seed=CONSISTENCY_SEED, mode=SimMode.TREE),
               threads=threads)
    combined = math.hypot(chain.stderr, tree.stderr)
    rows.append(_row('chain vs tree mean height n=300', [n],
                     {'chain': [chain.mean], 'tree': [tree.mean]}, 5.0,
                     deltas={'z_score': [(chain.mean - tree.mean) / combined]}))

    samples = 100_000
    clt = run(SimConfig(n=n_big, samples=samples, seed=CLT_SEED, x_grid=(1.0,)), threads=threads)
    log_n = math.log(n_big)
    mu, sigma2 = clt_params()
    c0 = expansion_constants()['c0']
    allowance = 4 / math.sqrt(samples) + 1.1 * c0 / math.sqrt(sigma2 * log_n)
    rows.append(_row('CLT standardized mean n=1e6', [n_big],
                     {'abs_mean': [abs(clt.extra['clt_standardized_mean'])]}, allowance,
                     kind='bound'))
    empirical = clt.extra['tail_exponents'][0]
    rows.append(_agreement('tail exponent x=1.0', [n_big], [rate_function(1.0).lambda_star],
                           {'simulated': [empirical]}, 0.15, reference_name='rate_function'))
    return rows


def run_suite(suite: str, threads: Optional[int] = None) -> VerifyReport:
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    started = time.perf_counter()
    if suite == 'core':
        rows = core_suite()
    elif suite == 'expansions':
        rows = expansions_suite()
    elif suite == 'mellin':
        rows = mellin_suite()
    else:
        rows = simulation_suite(threads or Config.THREADS)
    report = VerifyReport(suite=suite, rows=rows)
    logger.info("verify %s: %d rows, %d failed, %.1fs", suite, len(rows),
                len(report.failed_rows()), time.perf_counter() - started)
    for row in report.failed_rows():
        logger.warning("verify %s: row %s failed", suite, row.quantity)
    return report
