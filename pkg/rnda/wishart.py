import logging
import math

import numpy as np

from .errors import DimensionError, DomainError, ParameterError
from .generators import elliptical_constant_log
from .hypergeom import (ConvergenceReport, HypParams, SeriesControl, hyp1f1_log,
                        hyp_pFq, hyp_pFq_log_batch, hyp_pFq_two)
from .jack import Spectrum
from .matrix import (AlgebraMatrix, HermitianMatrix, embed, pair_average,
                     product_spectrum, trace_product)
from .special import mv_gamma_log, spectral_constant_log

"""
Densities of S = X* Theta^-1 X for matrix-variate elliptical X over R, C,
H (and, from spectra alone, O):

  * the generalised Wishart density for an arbitrary generator h
  * the (noncentral) Wishart density, the normal-generator case
  * the inverse generalised Wishart density of W = S^-1
  * the central joint density of the eigenvalues of S
  * the central P[S < Delta] and the distribution of the largest eigenvalue

All functions return natural logarithms.
"""

__all__ = ['WishartParams', 'gw_density_log', 'wishart_density_log',
           'inv_gw_density_log', 'eigen_joint_density_central_log',
           'smax_cdf_central_log', 'lambda_max_cdf_central',
           'noncentral_log_ratio']

logger = logging.getLogger(__name__)

_SELF_ADJOINT_RTOL = 1e-8


def _central_report():
    return ConvergenceReport(0, [0.0], True,
                             notes=['central: only the constant term survives'])


class WishartParams:
    '''
    Parameters of a (noncentral) Wishart or generalised Wishart law.

    The noncentrality Omega = Sigma^-1 mu* Theta^-1 mu is held as the
    Hermitian matrix M = Sigma Omega = mu* Theta^-1 mu.

    Parameters
    ----------
    n : float
        degrees of freedom, n > m - 1
    sigma : `HermitianMatrix`
        positive definite scale
    omega : `HermitianMatrix`, optional
        noncentrality; Sigma omega must be self-adjoint and positive
        semidefinite. None means central.
    '''

    def __init__(self, n, sigma, omega=None, *, noncentrality=None,
                 mu=None, theta=None):
        self._logger = logging.getLogger(__name__)
        self.sigma = sigma
        self.beta = sigma.beta
        self.n = float(n)
        m = sigma.m
        if not self.n > m - 1:
            raise DomainError(f"Need n > m - 1 for the Wishart normaliser; got n={n:g}, m={m}")
        if not sigma.is_positive_definite():
            raise DomainError("sigma must be positive definite")
        self.sigma_inv = sigma.inverse()
        self.logdet_sigma = sigma.logdet()

        if omega is not None and noncentrality is not None:
            raise ParameterError("Give either omega or noncentrality, not both")
        if omega is not None:
            noncentrality = self._noncentrality_from_omega(omega)
        if noncentrality is not None:
            if noncentrality.m != m or int(noncentrality.beta) != int(self.beta):
                raise DimensionError("noncentrality does not match sigma")
            if int(self.beta) != 8 or noncentrality.is_real_form:
                lowest = noncentrality.spectrum().values[-1]
                scale = max(1.0, abs(noncentrality.spectrum().values[0]))
                if lowest < -_SELF_ADJOINT_RTOL * scale:
                    raise DomainError("noncentrality must be positive semidefinite")
            if not np.any(noncentrality.planes):
                noncentrality = None
        self.noncentrality = noncentrality
        self.mu = mu
        self.theta = theta

    def _noncentrality_from_omega(self, omega):
        if omega.shape != self.sigma.shape:
            raise DimensionError(f"omega has shape {omega.shape}, sigma {self.sigma.shape}")
        prod = (self.sigma @ omega).planes
        adjoint = np.swapaxes(prod, -1, -2).copy()
        adjoint[1:] *= -1
        err = np.max(np.abs(prod - adjoint))
        if err > _SELF_ADJOINT_RTOL * max(1.0, np.max(np.abs(prod))):
            raise DomainError("sigma * omega must be self-adjoint")
        return HermitianMatrix(prod, self.beta, atol=np.inf)

    @classmethod
    def from_mean(cls, n, sigma, mu, theta=None):
        '''
        Parameters of S = X* Theta^-1 X for X with mean `mu` (an n x m
        `AlgebraMatrix`), so that M = mu* Theta^-1 mu.
        '''
        rows, cols = mu.shape
        if cols != sigma.m or int(mu.beta) != int(sigma.beta):
            raise DimensionError(f"mu has shape {mu.shape}; sigma is {sigma.m} x {sigma.m}")
        if rows != n:
            raise DimensionError(f"mu must have n={n:g} rows; got {rows}")
        if theta is None:
            theta = HermitianMatrix.identity(rows, sigma.beta)
        if theta.m != rows:
            raise DimensionError(f"theta must be {rows} x {rows}")
        prod = mu.conj_transpose() @ theta.inverse() @ mu
        M = HermitianMatrix(prod.planes, sigma.beta, atol=np.inf)
        return cls(n, sigma, noncentrality=M, mu=mu, theta=theta)

    @property
    def m(self):
        return self.sigma.m

    @property
    def is_central(self):
        return self.noncentrality is None

    @property
    def omega(self):
        '''Sigma^-1 M as an `AlgebraMatrix`'''
        if self.is_central:
            return AlgebraMatrix(np.zeros((int(self.beta), self.m, self.m)), self.beta)
        return self.sigma_inv @ self.noncentrality

    @property
    def trace_omega(self):
        if self.is_central:
            return 0.0
        return trace_product(self.sigma_inv, self.noncentrality)

    def omega_form(self):
        '''Sigma^-1 M Sigma^-1, Hermitian; Omega Sigma^-1 = this'''
        return self.noncentrality.congruence(self.sigma_inv)

    def noncentral_spectrum(self, S):
        '''eigenvalues of Omega Sigma^-1 S'''
        if self.is_central:
            return Spectrum(np.zeros(self.m))
        return product_spectrum(self.omega_form(), S)

    def copy(self):
        return WishartParams(self.n, self.sigma.copy(), noncentrality=(
            None if self.is_central else self.noncentrality.copy()),
            mu=self.mu, theta=self.theta)

    def __repr__(self):
        kind = 'central' if self.is_central else 'noncentral'
        return (f"<WishartParams(n={self.n:g}, m={self.m}, beta={int(self.beta)}, "
                f"{kind})>")

    def info(self):
        log = self._logger.info
        log('%s', repr(self))
        log('log|Sigma| = %.6g, tr Omega = %.6g', self.logdet_sigma, self.trace_omega)


def _check_matrix(S, p, label):
    if S.m != p.m or int(S.beta) != int(p.beta):
        raise DimensionError(f"{label} is {S.m} x {S.m} over beta={int(S.beta)};"
                             f" expected {p.m} x {p.m} over beta={int(p.beta)}")


def _wishart_normaliser(p):
    b = int(p.beta)
    return (-(b * p.m * p.n / 2.0) * math.log(2.0 / b)
            - mv_gamma_log(b * p.n / 2.0, p.m, p.beta)
            - (b * p.n / 2.0) * p.logdet_sigma)


def wishart_density_log(S, p, ctrl=None):
    '''
    Log-density of the noncentral Wishart law at the positive definite S,

        (beta/2)^{beta m n/2} |S|^{beta(n-m+1)/2 - 1}
        / (Gamma_m[beta n/2] |Sigma|^{beta n/2})
        etr(-beta (Sigma^-1 S + Omega) / 2)
        0F1(beta n/2; beta^2 Omega Sigma^-1 S / 4)

    Parameters
    ----------
    S : `HermitianMatrix`
    p : `WishartParams`
    ctrl : `SeriesControl`, optional
        receives the convergence report in `diagnostics`
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    _check_matrix(S, p, 'S')
    b = int(p.beta)
    log_s = S.logdet()
    tr = trace_product(p.sigma_inv, S)
    value = (_wishart_normaliser(p) + (b * (p.n - p.m + 1) / 2.0 - 1.0) * log_s
             - (b / 2.0) * (tr + p.trace_omega))
    if p.is_central:
        ctrl.diagnostics = _central_report()
        return value
    x = p.noncentral_spectrum(S).values * (b * b / 4.0)
    res = hyp_pFq(HypParams([], [b * p.n / 2.0]), x, p.beta, ctrl)
    return value + res.log_abs


def _gw_prefactor(p, h):
    b = int(p.beta)
    log_c = elliptical_constant_log(h, p.m, p.n, p.beta).log_c
    return ((b * p.m * p.n / 2.0) * math.log(math.pi) + log_c
            - mv_gamma_log(b * p.n / 2.0, p.m, p.beta)
            - (b * p.n / 2.0) * p.logdet_sigma)


def _gw_series_log(S, p, h, ctrl):
    '''
    log of sum_k h^(2k)(v) / k! sum_kappa C_kappa(Omega Sigma^-1 S) / [beta n/2]_kappa
    with v = tr(Sigma^-1 S) + tr(Omega)
    '''
    b = int(p.beta)
    v = trace_product(p.sigma_inv, S) + p.trace_omega
    x = p.noncentral_spectrum(S).values

    def layer_factor(k):
        return h.log_derivative(2 * k, v)

    log_abs, sign, _ = hyp_pFq_log_batch(HypParams([], [b * p.n / 2.0]), x[None, :],
                                         p.beta, ctrl, layer_factor=layer_factor)
    if not sign[0] > 0:
        raise DomainError(f"generator series for {h.name} is not positive at this point")
    return float(log_abs[0])


def gw_density_log(S, p, h, ctrl=None):
    '''
    Log-density of the generalised Wishart law with generator `h` at S,

        pi^{beta m n/2} C(m, n) |S|^{beta(n-m+1)/2 - 1}
        / (Gamma_m[beta n/2] |Sigma|^{beta n/2})
        sum_k h^(2k)(tr Sigma^-1 S + tr Omega) / k!
              sum_kappa C_kappa(Omega Sigma^-1 S) / [beta n/2]_kappa
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    _check_matrix(S, p, 'S')
    b = int(p.beta)
    log_s = S.logdet()
    return (_gw_prefactor(p, h) + (b * (p.n - p.m + 1) / 2.0 - 1.0) * log_s
            + _gw_series_log(S, p, h, ctrl))


def inv_gw_density_log(W, p, h, ctrl=None):
    '''
    Log-density of W = S^-1 when S follows the generalised Wishart law,

        pi^{beta m n/2} C(m, n) |W|^{-beta(n+m-1)/2 - 1}
        / (Gamma_m[beta n/2] |Sigma|^{beta n/2})
        sum_k h^(2k)(tr Sigma^-1 W^-1 + tr Omega) / k!
              sum_kappa C_kappa(Omega Sigma^-1 W^-1) / [beta n/2]_kappa

    The |W| exponent carries the Jacobian |W|^{-beta(m-1)-2} of W -> W^-1.
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    _check_matrix(W, p, 'W')
    b = int(p.beta)
    log_w = W.logdet()
    w_inv = W.inverse()
    return (_gw_prefactor(p, h) + (-b * (p.n + p.m - 1) / 2.0 - 1.0) * log_w
            + _gw_series_log(w_inv, p, h, ctrl))


def _require_central(p, what):
    if not p.is_central:
        raise ParameterError(f"{what} is only available for Omega = 0;"
                             " use the Monte Carlo estimators for noncentral laws")


def eigen_joint_density_central_log(lam, p, ctrl=None):
    '''
    Log of the joint density of the ordered eigenvalues l_1 > ... > l_m > 0
    of a central Wishart matrix,

        K prod l_i^{beta(n-m+1)/2 - 1} prod_{i<j} (l_i - l_j)^beta
        0F0(-beta Sigma^-1 / 2, L)

    with K = pi^{beta m(m-1)/2} Gamma(beta/2)^m / Gamma_m[beta m/2] times
    the Wishart normaliser. Tied eigenvalues give -inf.
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    _require_central(p, 'the joint eigenvalue density')
    lam = lam if isinstance(lam, Spectrum) else Spectrum(lam)
    if lam.m != p.m:
        raise DimensionError(f"Expected {p.m} eigenvalues; got {lam.m}")
    values = lam.values
    if values[-1] <= 0:
        raise DomainError("eigenvalues must be positive")
    gaps = values[:, None] - values[None, :]
    upper = gaps[np.triu_indices(p.m, 1)]
    if np.any(upper <= 0):
        ctrl.diagnostics = _central_report()
        ctrl.diagnostics.note('tied eigenvalues: the density vanishes')
        return -np.inf

    b = int(p.beta)
    sigma_values = p.sigma.spectrum().values
    x = -(b / 2.0) / sigma_values
    res = hyp_pFq_two(HypParams(), Spectrum(x), lam, p.beta, ctrl)
    return (spectral_constant_log(p.m, p.beta) + _wishart_normaliser(p)
            + (b * (p.n - p.m + 1) / 2.0 - 1.0) * float(np.sum(np.log(values)))
            + b * float(np.sum(np.log(upper)))
            + res.log_abs)


def smax_cdf_central_log(Delta, p, ctrl=None):
    '''
    log P[S < Delta] for a central Wishart S and positive definite Delta,

        Gamma_m[beta(m-1)/2 + 1] |Delta|^{beta n/2}
        / ((2/beta)^{beta m n/2} Gamma_m[beta(n+m-1)/2 + 1] |Sigma|^{beta n/2})
        1F1(beta n/2; beta(n+m-1)/2 + 1; -beta Sigma^-1 Delta / 2)
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    _require_central(p, 'P[S < Delta]')
    _check_matrix(Delta, p, 'Delta')
    b = int(p.beta)
    m, n = p.m, p.n
    log_delta = Delta.logdet()
    x = (b / 2.0) * product_spectrum(p.sigma_inv, Delta).values
    a = b * n / 2.0
    c = b * (n + m - 1) / 2.0 + 1.0
    res = hyp1f1_log(a, c, Spectrum(-x), p.beta, ctrl)
    if res.sign <= 0:
        raise DomainError("P[S < Delta] series returned a non-positive value")
    return (mv_gamma_log((m - 1) * b / 2.0 + 1.0, m, p.beta)
            + (b * n / 2.0) * log_delta
            - (b * m * n / 2.0) * math.log(2.0 / b)
            - mv_gamma_log(c, m, p.beta)
            - (b * n / 2.0) * p.logdet_sigma
            + res.log_abs)


def lambda_max_cdf_central(y, p, ctrl=None):
    '''
    P[lambda_max(S) < y] = P[S < y I], clamped to [0, 1]. Clamping by more
    than `ctrl.rel_tol` is logged and noted in the convergence report.
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    if not y > 0:
        raise DomainError(f"y must be positive; got {y}")
    delta = HermitianMatrix.identity(p.m, p.beta).scaled(float(y))
    value = math.exp(smax_cdf_central_log(delta, p, ctrl))
    if value > 1.0:
        if value - 1.0 > ctrl.rel_tol:
            logger.warning("lambda_max CDF at y=%g came out as %.12g; clamped to 1", y, value)
            if ctrl.diagnostics is not None:
                ctrl.diagnostics.note(f"clamped {value:.12g} to 1")
        value = 1.0
    return value


def _spectra_batch(S_planes, A_half, beta):
    '''eigenvalues of A^(1/2) S A^(1/2) for a stack of S given as planes'''
    S_c = embed(S_planes, beta)
    C = A_half @ S_c @ A_half
    C = 0.5 * (C + np.swapaxes(C.conj(), -1, -2))
    values = np.linalg.eigvalsh(C)
    if int(beta) == 4:
        values = pair_average(values)
    return values[..., ::-1]


def noncentral_log_ratio(S_planes, p, ctrl=None):
    '''
    log f_Omega(S) - log f_0(S) = -beta tr(Omega) / 2
                                  + log 0F1(beta n/2; beta^2 Omega Sigma^-1 S / 4)
    for a stack of matrices S.

    Parameters
    ----------
    S_planes : (N, beta, m, m) array
    p : `WishartParams`

    Returns
    -------
    out : (N,) array
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    S_planes = np.asarray(S_planes, dtype=np.float64)
    if S_planes.ndim != 4 or S_planes.shape[1:] != (int(p.beta), p.m, p.m):
        raise DimensionError(f"Expected (N, {int(p.beta)}, {p.m}, {p.m}) planes;"
                             f" got {S_planes.shape}")
    if p.is_central:
        ctrl.diagnostics = _central_report()
        return np.zeros(S_planes.shape[0])
    b = int(p.beta)
    A_half = p.omega_form().sqrt().to_complex()
    x = _spectra_batch(S_planes, A_half, p.beta) * (b * b / 4.0)
    x = np.clip(x, 0.0, None)
    log_abs, _, _ = hyp_pFq_log_batch(HypParams([], [b * p.n / 2.0]), x, p.beta, ctrl)
    return -(b / 2.0) * p.trace_omega + log_abs
