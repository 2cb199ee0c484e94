import logging
import math
from collections import namedtuple

import numpy as np
from scipy import stats
from scipy.integrate import dblquad
from scipy.special import gammainc

from .errors import RndaError
from .generators import normal_generator
from .hypergeom import HypParams, SeriesControl, hyp_pFq
from .jack import JackLayers
from .matrix import AlgebraMatrix, HermitianMatrix, random_positive_definite
from .sampling import (gram, mc_importance_normalization, mc_lambda_max_cdf,
                       sample_matrix_normal, sample_wishart_spectra)
from .settings import budgets
from .special import AlgebraDim
from .wishart import (WishartParams, eigen_joint_density_central_log, gw_density_log,
                      inv_gw_density_log, lambda_max_cdf_central, wishart_density_log)

"""
Verification suites. Every check compares a measured error against a
tolerance and ends up as one `Check` record; `run_suites` collects them.

    identities      Jack layer sums, 0F0 and 1F0 closed forms, the inverse
                    density identity, generator path vs 0F1 path
    reductions      m = 1 densities and CDFs against scipy.stats
    mc-central      sampler vs chi-square, quaternion pairing, lambda_max
                    CDF vs Monte Carlo
    mc-noncentral   importance-sampling normalisation of the noncentral density
"""

__all__ = ['Check', 'SUITES', 'run_suites']

logger = logging.getLogger(__name__)

Check = namedtuple('Check', ['suite', 'name', 'measured', 'tolerance', 'passed', 'detail'])

BASE_SEED = 20240611


def _record(checks, suite, name, measured, tolerance, detail=''):
    measured = float(measured)
    passed = bool(np.isfinite(measured) and measured <= tolerance)
    check = Check(suite, name, measured, float(tolerance), passed, detail)
    logger.info('[%s] %-44s measured %.3e  tol %.1e  %s', suite, name,
                measured, tolerance, 'ok' if passed else 'FAILED')
    checks.append(check)


def _guarded(checks, suite, name, tolerance, func):
    '''run func() -> measured error, turning library errors into a failure'''
    try:
        measured = func()
    except RndaError as err:
        logger.info('[%s] %-44s raised %s: %s', suite, name, type(err).__name__, err)
        checks.append(Check(suite, name, math.inf, float(tolerance), False,
                            f"{type(err).__name__}: {err}"))
        return
    _record(checks, suite, name, measured, tolerance)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -------------------------------------------------------------------------
# identities


def _jack_layer_sums(rng, budget):
    worst = 0.0
    count = budget['jack_spectra']
    for beta in AlgebraDim:
        for m in range(1, 5):
            x = rng.uniform(0.0, 2.0, size=(count, m))
            layers = JackLayers(x, beta)
            trace = np.sum(x, axis=1)
            for k in range(budget['jack_max_weight'] + 1):
                total = np.sum(layers.layer(k), axis=0)
                worst = max(worst, float(np.max(np.abs(total - trace ** k) / trace ** k)))
    return worst


def _hyp_closed_forms(rng, budget, which):
    worst = 0.0
    ctrl = SeriesControl(max_degree=40, rel_tol=1e-12)
    for beta in AlgebraDim:
        for m in range(1, 5):
            for _ in range(max(1, budget['random_points'] // 10)):
                if which == '0F0':
                    x = rng.uniform(-1.0, 1.0, size=m)
                    res = hyp_pFq(HypParams(), x, beta, ctrl)
                    worst = max(worst, _rel(res.value, math.exp(np.sum(x))))
                else:
                    x = rng.uniform(-0.25, 0.25, size=m)
                    res = hyp_pFq(HypParams([2.5]), x, beta, ctrl)
                    worst = max(worst, _rel(res.value, float(np.prod(1.0 - x)) ** -2.5))
    return worst


def _random_params(rng, m, beta, noncentral):
    sigma = random_positive_definite(m, beta, rng)
    n = m + 1 + rng.integers(0, 4)
    if not noncentral:
        return WishartParams(n, sigma)
    M = random_positive_definite(m, beta, rng, floor=0.0).scaled(0.5)
    return WishartParams(n, sigma, noncentrality=M)


def _inverse_identity(rng, budget):
    worst = 0.0
    for beta in (1, 2, 4):
        h = normal_generator(beta)
        for i in range(budget['random_points']):
            m = 1 + i % 3
            p = _random_params(rng, m, beta, noncentral=bool(i % 2))
            S = random_positive_definite(m, beta, rng)
            W = S.inverse()
            lhs = inv_gw_density_log(W, p, h)
            rhs = gw_density_log(S, p, h) + (beta * (m - 1) + 2) * S.logdet()
            worst = max(worst, abs(lhs - rhs))
    return worst


def _generator_paths(rng, budget):
    worst = 0.0
    for i in range(budget['random_points']):
        beta = (1, 2, 4)[i % 3]
        m = 1 + i % 3
        p = _random_params(rng, m, beta, noncentral=bool(i % 2))
        S = random_positive_definite(m, beta, rng)
        a = gw_density_log(S, p, normal_generator(beta))
        b = wishart_density_log(S, p)
        worst = max(worst, _rel(a, b))
    return worst


def _identities(checks, budget):
    rng = np.random.default_rng(BASE_SEED)
    suite = 'identities'
    _guarded(checks, suite, 'jack layer sums', 1e-10, lambda: _jack_layer_sums(rng, budget))
    _guarded(checks, suite, '0F0(X) = etr(X)', 1e-10,
             lambda: _hyp_closed_forms(rng, budget, '0F0'))
    _guarded(checks, suite, '1F0(a; X) = |I - X|^-a', 1e-8,
             lambda: _hyp_closed_forms(rng, budget, '1F0'))
    _guarded(checks, suite, 'inverse density identity', 1e-12,
             lambda: _inverse_identity(rng, budget))
    _guarded(checks, suite, 'generator path vs 0F1 path', 1e-10,
             lambda: _generator_paths(rng, budget))


# -------------------------------------------------------------------------
# m = 1 reductions


def _scalar_params(beta, n, sigma, omega=0.0):
    sig = HermitianMatrix.from_spectrum([sigma], beta)
    M = None if omega == 0 else HermitianMatrix.from_spectrum([omega * sigma], beta)
    return WishartParams(n, sig, noncentrality=M)


def _scalar_density(budget, noncentral):
    worst = 0.0
    grid = np.linspace(0.25, 8.0, budget['grid_points'])
    for beta in AlgebraDim:
        b = int(beta)
        n, sigma, omega = 3, 1.5, (0.8 if noncentral else 0.0)
        p = _scalar_params(beta, n, sigma, omega)
        if noncentral:
            oracle = stats.ncx2(df=b * n, nc=b * omega, scale=sigma / b)
        else:
            oracle = stats.gamma(a=b * n / 2.0, scale=2.0 * sigma / b)
        for s in grid:
            S = HermitianMatrix.from_spectrum([s], beta)
            worst = max(worst, abs(wishart_density_log(S, p) - oracle.logpdf(s)))
    return worst


def _scalar_cdf(budget):
    worst = 0.0
    grid = np.linspace(0.25, 8.0, budget['grid_points'])
    ctrl = SeriesControl(max_degree=budget['lmax_max_degree'])
    for beta in AlgebraDim:
        b = int(beta)
        n, sigma = 2, 1.0
        p = _scalar_params(beta, n, sigma)
        for y in grid:
            expected = gammainc(b * n / 2.0, b * y / (2.0 * sigma))
            worst = max(worst, _rel(lambda_max_cdf_central(y, p, ctrl), expected))
    return worst


def _joint_density_mass(y=None):
    p = WishartParams(3, HermitianMatrix.identity(2, 1))
    upper = np.inf if y is None else y

    def integrand(l2, l1):
        if l2 >= l1:
            return 0.0
        return math.exp(eigen_joint_density_central_log([l1, l2], p))

    mass, _ = dblquad(integrand, 0.0, upper, lambda l1: 0.0, lambda l1: l1,
                      epsabs=1e-9, epsrel=1e-7)
    if y is None:
        return abs(mass - 1.0)
    return abs(mass - lambda_max_cdf_central(y, p))


def _reductions(checks, budget):
    suite = 'reductions'
    _guarded(checks, suite, 'm=1 central density vs gamma', 1e-8,
             lambda: _scalar_density(budget, noncentral=False))
    _guarded(checks, suite, 'm=1 noncentral density vs ncx2', 1e-8,
             lambda: _scalar_density(budget, noncentral=True))
    _guarded(checks, suite, 'm=1 lambda_max CDF vs gammainc', 1e-8,
             lambda: _scalar_cdf(budget))
    if budget['quad_check']:
        _guarded(checks, suite, 'joint eigenvalue density mass', 1e-3, _joint_density_mass)
        _guarded(checks, suite, 'lambda_max CDF vs joint density', 1e-4,
                 lambda: _joint_density_mass(y=4.0))


# -------------------------------------------------------------------------
# Monte Carlo


def _ks_chi2(budget):
    count = budget['mc_count']
    batch = sample_wishart_spectra(2, HermitianMatrix.identity(1, 1), 1, count, BASE_SEED)
    res = stats.kstest(batch.lambda_max, stats.chi2(df=2).cdf)
    # measured against the 99% critical value
    return res.statistic * math.sqrt(count) / 1.63


def _quaternion_pairing():
    sigma = HermitianMatrix.from_real(np.diag([1.0, 0.5, 0.25]), 4)
    mu = AlgebraMatrix(np.zeros((4, 5, 3)), 4)
    worst = 0.0
    for X in sample_matrix_normal(mu, sigma, None, BASE_SEED, 64):
        values = np.linalg.eigvalsh(gram(X).to_complex())
        gaps = np.abs(values[0::2] - values[1::2])
        worst = max(worst, float(np.max(gaps)) / float(np.max(np.abs(values))))
    return worst


def _lambda_max_mc(beta, budget):
    sigma = HermitianMatrix.from_real(np.diag([1.0, 0.5]), beta)
    p = WishartParams(4, sigma)
    y = 4.0 * np.array([0.6, 0.9, 1.2, 1.6, 2.2])
    count = budget['mc_count']
    est = mc_lambda_max_cdf(p, y, count, BASE_SEED + beta)
    ctrl = SeriesControl(max_degree=budget['lmax_max_degree'])
    worst = 0.0
    for yi, empirical in zip(y, est.cdf):
        exact = lambda_max_cdf_central(yi, p, ctrl)
        se = math.sqrt(exact * (1.0 - exact) / count)
        worst = max(worst, abs(empirical - exact) / se)
    return worst


def _mc_central(checks, budget):
    suite = 'mc-central'
    _guarded(checks, suite, 'KS: beta=1 m=1 n=2 vs chi2(2)', 1.0, lambda: _ks_chi2(budget))
    _guarded(checks, suite, 'quaternion eigenvalue pairing', 1e-12, _quaternion_pairing)
    for beta in (1, 2, 4):
        _guarded(checks, suite, f'lambda_max CDF vs MC, beta={beta} (s.e.)', 3.0,
                 lambda beta=beta: _lambda_max_mc(beta, budget))


def _importance(beta, budget):
    sigma = HermitianMatrix.identity(2, beta)
    M = HermitianMatrix.from_real(np.array([[1.2, 0.3], [0.3, 0.6]]), beta)
    p = WishartParams(3, sigma, noncentrality=M)
    est = mc_importance_normalization(p, budget['mc_count'], BASE_SEED + 10 * beta)
    return abs(est.estimate - 1.0) / est.stderr


def _mc_noncentral(checks, budget):
    suite = 'mc-noncentral'
    for beta in (1, 2):
        _guarded(checks, suite, f'importance normalisation, beta={beta} (s.e.)', 3.0,
                 lambda beta=beta: _importance(beta, budget))


SUITES = {
    'identities': _identities,
    'reductions': _reductions,
    'mc-central': _mc_central,
    'mc-noncentral': _mc_noncentral,
}


def run_suites(suite='all', budget='fast'):
    '''
    Run one suite (or 'all') under the named budget.

    Returns
    -------
    out : list of `Check`
    '''
    try:
        settings = budgets[budget]
    except KeyError:
        raise ValueError(f"unknown budget '{budget}'")
    names = list(SUITES) if suite == 'all' else [suite]
    checks = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite '{name}'")
        SUITES[name](checks, settings)
    failed = sum(not c.passed for c in checks)
    logger.info('%d checks, %d failed', len(checks), failed)
    return checks
