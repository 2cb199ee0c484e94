import logging
import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from astropy.table import Table

from .errors import DimensionError, DomainError, ParameterError, UnsupportedAlgebraError
from .hypergeom import SeriesControl
from .matrix import AlgebraMatrix, HermitianMatrix, embed, pair_average, unembed
from .settings import CHUNK_SIZE, MIN_MC_COUNT, threads_from_env
from .tools import progress_bar
from .wishart import WishartParams, noncentral_log_ratio

"""
Monte Carlo for S = X* Theta^-1 X with X matrix-variate normal over R, C
or H. Samples are drawn in chunks of `CHUNK_SIZE`; chunk i always uses the
RNG substream SeedSequence(seed, spawn_key=(i,)), so the numbers depend on
the seed and the count, never on how many threads ran the chunks.
"""

__all__ = ['SampleBatch', 'sample_matrix_normal', 'gram',
           'sample_wishart_spectra', 'mc_lambda_max_cdf',
           'mc_importance_normalization', 'CDFEstimate', 'MCEstimate']

logger = logging.getLogger(__name__)

CDFEstimate = namedtuple('CDFEstimate', ['y', 'cdf', 'stderr', 'count'])
MCEstimate = namedtuple('MCEstimate', ['estimate', 'stderr', 'count'])


def _chunk_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _chunks(count, chunk_size=CHUNK_SIZE):
    return [(i, min(chunk_size, count - start))
            for i, start in enumerate(range(0, count, chunk_size))]


def _check_beta(beta):
    if int(beta) == 8:
        raise UnsupportedAlgebraError(
            "octonion sampling is not supported: no associative matrix model for beta=8")


class _NormalSampler:
    '''
    Draws X = mu + Theta^(1/2) Z Sigma^(1/2) in the complex embedding, with
    the beta real components of every entry of Z independent N(0, 1/beta).
    '''

    def __init__(self, mu, sigma, theta):
        _check_beta(sigma.beta)
        self.beta = sigma.beta
        rows, cols = mu.shape
        if cols != sigma.m or int(mu.beta) != int(sigma.beta):
            raise DimensionError(f"mu has shape {mu.shape}; sigma is {sigma.m} x {sigma.m}")
        if theta is None:
            theta = HermitianMatrix.identity(rows, sigma.beta)
        if theta.m != rows or int(theta.beta) != int(sigma.beta):
            raise DimensionError(f"theta must be {rows} x {rows} over beta={int(sigma.beta)}")
        for name, mat in (('sigma', sigma), ('theta', theta)):
            if not mat.is_positive_definite():
                raise DomainError(f"{name} must be positive definite")
        self.rows, self.cols = rows, cols
        self.mu = mu.to_complex()
        self.sigma_half = sigma.sqrt().to_complex()
        self.theta_half = theta.sqrt().to_complex()
        self.theta_inv = theta.inverse().to_complex()

    def draw(self, seed, index, size):
        rng = _chunk_rng(seed, index)
        b = int(self.beta)
        z = rng.standard_normal((size, b, self.rows, self.cols)) / math.sqrt(b)
        return self.mu + self.theta_half @ embed(z, b) @ self.sigma_half

    def gram(self, x):
        s = np.swapaxes(x.conj(), -1, -2) @ self.theta_inv @ x
        return 0.5 * (s + np.swapaxes(s.conj(), -1, -2))

    def spectra(self, s):
        values = np.linalg.eigvalsh(s)
        if int(self.beta) == 4:
            values = pair_average(values)
        return values[..., ::-1]


def sample_matrix_normal(mu, sigma, theta, seed, count):
    '''
    Stream of `count` matrix-variate normal samples with mean `mu` (n x m),
    column covariance `sigma` (m x m) and row covariance `theta` (n x n).

    Yields
    ------
    X : `AlgebraMatrix`
    '''
    sampler = _NormalSampler(mu, sigma, theta)
    for index, size in _chunks(count):
        for x in sampler.draw(seed, index, size):
            yield AlgebraMatrix.from_complex(x, sampler.beta)


def gram(X, theta=None):
    '''
    S = X* Theta^-1 X; one triangle is computed and reflected, so S is
    exactly self-adjoint.
    '''
    rows = X.shape[0]
    if theta is None:
        theta = HermitianMatrix.identity(rows, X.beta)
    if theta.m != rows:
        raise DimensionError(f"theta is {theta.m} x {theta.m}; X has {rows} rows")
    _check_beta(X.beta)
    prod = X.conj_transpose() @ theta.inverse() @ X
    return HermitianMatrix(prod.planes, X.beta, atol=np.inf)


class SampleBatch:
    '''
    Sorted eigenvalues of sampled Wishart matrices, one row per sample.

    Parameters
    ----------
    spectra : (count, m) array
    base_seed : int or None
    chunk_size : int
    '''

    def __init__(self, spectra, base_seed=None, chunk_size=CHUNK_SIZE):
        self._logger = logging.getLogger(__name__)
        spectra = np.array(spectra, dtype=np.float64, copy=True)
        if spectra.ndim != 2:
            raise DimensionError(f"spectra must be 2-d; got shape {spectra.shape}")
        self.spectra = -np.sort(-spectra, axis=1)
        self.base_seed = base_seed
        self.chunk_size = int(chunk_size)

    @property
    def count(self):
        return self.spectra.shape[0]

    @property
    def m(self):
        return self.spectra.shape[1]

    @property
    def lambda_max(self):
        return self.spectra[:, 0]

    @property
    def seeds(self):
        '''(base_seed, chunk_index) for every chunk of the batch'''
        return [(self.base_seed, i) for i, _ in _chunks(self.count, self.chunk_size)]

    def to_table(self):
        names = [f'lambda_{i + 1}' for i in range(self.m)]
        return Table(self.spectra, names=names)

    def to_csv(self, fname):
        self.to_table().write(fname, format='ascii.csv', overwrite=True)

    @classmethod
    def from_csv(cls, fname, base_seed=None):
        table = Table.read(fname, format='ascii.csv')
        names = [f'lambda_{i + 1}' for i in range(len(table.colnames))]
        if table.colnames != names:
            raise DimensionError(f"unexpected columns {table.colnames}")
        spectra = np.column_stack([np.asarray(table[name], dtype=np.float64)
                                   for name in names])
        return cls(spectra, base_seed=base_seed)

    def __repr__(self):
        return f"<SampleBatch(count={self.count}, m={self.m}, base_seed={self.base_seed})>"

    def info(self):
        self._logger.info('%s', repr(self))
        if self.count:
            self._logger.info('mean spectrum: %s',
                              np.array2string(self.spectra.mean(axis=0), precision=4))


def _default_mean(params):
    '''
    An n x m mean with mu* mu = M: the square root of M on top of zeros.
    '''
    n = int(params.n)
    b = int(params.beta)
    planes = np.zeros((b, n, params.m))
    if not params.is_central:
        planes[:, :params.m, :] = params.noncentrality.sqrt().planes
    return AlgebraMatrix(planes, b)


def _sampler_for(params):
    if not float(params.n).is_integer():
        raise ParameterError(f"sampling needs integer degrees of freedom; got n={params.n:g}")
    if params.mu is not None:
        return _NormalSampler(params.mu, params.sigma, params.theta)
    return _NormalSampler(_default_mean(params), params.sigma, None)


def _run_chunks(work, count, threads, progress, desc):
    chunks = _chunks(count)
    threads = threads_from_env() if threads is None else max(1, int(threads))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = pool.map(work, chunks)
        if progress:
            results = progress_bar(results, total=len(chunks), desc=desc)
        return list(results)


def _check_count(count, minimum=1):
    if int(count) != count or count < minimum:
        raise ParameterError(f"count must be an integer >= {minimum}; got {count}")
    return int(count)


def sample_wishart_spectra(n, sigma, beta, count, seed, mu=None, theta=None,
                           threads=None, progress=False):
    '''
    Eigenvalues of `count` samples of S = X* Theta^-1 X.

    Parameters
    ----------
    n : int
        rows of X
    sigma : `HermitianMatrix`
    beta : int or `AlgebraDim`
        1, 2 or 4
    count, seed : int
    mu : `AlgebraMatrix`, optional
        n x m mean; zero when not given
    theta : `HermitianMatrix`, optional
        n x n row covariance; identity when not given
    threads : int, optional
        worker threads; defaults to `threads_from_env()`
    progress : bool
        show a progress bar over the chunks

    Returns
    -------
    out : `SampleBatch`
    '''
    _check_beta(beta)
    if int(beta) != int(sigma.beta):
        raise DimensionError(f"sigma is over beta={int(sigma.beta)}, not {int(beta)}")
    count = _check_count(count)
    if mu is None:
        params = WishartParams(n, sigma)
        sampler = _sampler_for(params)
        if theta is not None:
            sampler = _NormalSampler(_default_mean(params), sigma, theta)
    else:
        params = WishartParams.from_mean(n, sigma, mu, theta)
        sampler = _sampler_for(params)

    def work(chunk):
        index, size = chunk
        return sampler.spectra(sampler.gram(sampler.draw(seed, index, size)))

    spectra = _run_chunks(work, count, threads, progress, 'sampling')
    logger.debug("drew %d samples in %d chunks", count, len(spectra))
    return SampleBatch(np.concatenate(spectra), base_seed=seed)


def mc_lambda_max_cdf(params, y_grid, count, seed, threads=None, progress=False):
    '''
    Empirical P[lambda_max < y] on a grid, from `count` samples of the law
    in `params` (central or not), with binomial standard errors.

    Returns
    -------
    out : `CDFEstimate`
    '''
    _check_beta(params.beta)
    count = _check_count(count, MIN_MC_COUNT)
    y = np.asarray(y_grid, dtype=np.float64).ravel()
    if not np.all(np.isfinite(y)):
        raise DomainError("y grid must be finite")
    sampler = _sampler_for(params)

    def work(chunk):
        index, size = chunk
        lmax = sampler.spectra(sampler.gram(sampler.draw(seed, index, size)))[:, 0]
        return np.sum(lmax[:, None] < y[None, :], axis=0)

    hits = np.sum(_run_chunks(work, count, threads, progress, 'lambda_max'), axis=0)
    cdf = hits / count
    stderr = np.sqrt(cdf * (1.0 - cdf) / count)
    return CDFEstimate(y, cdf, stderr, count)


def mc_importance_normalization(params, count, seed, ctrl=None, threads=None,
                                progress=False):
    '''
    Mean of f_Omega(S) / f_0(S) over central samples S; it estimates the
    integral of the noncentral density, which should be 1.

    Returns
    -------
    out : `MCEstimate`
    '''
    _check_beta(params.beta)
    count = _check_count(count, MIN_MC_COUNT)
    ctrl = SeriesControl() if ctrl is None else ctrl
    central = WishartParams(params.n, params.sigma)
    sampler = _sampler_for(central)
    b = int(params.beta)

    def work(chunk):
        index, size = chunk
        s = sampler.gram(sampler.draw(seed, index, size))
        local = SeriesControl(ctrl.max_degree, ctrl.rel_tol)
        return np.exp(noncentral_log_ratio(unembed(s, b), params, local))

    weights = np.concatenate(_run_chunks(work, count, threads, progress, 'importance'))
    estimate = float(np.mean(weights))
    stderr = float(np.std(weights, ddof=1) / math.sqrt(count))
    return MCEstimate(estimate, stderr, count)
