import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats
from scipy.integrate import dblquad
from scipy.special import gammainc

from rnda.errors import DimensionError, DomainError, ParameterError
from rnda.generators import normal_generator
from rnda.hypergeom import SeriesControl
from rnda.matrix import AlgebraMatrix, HermitianMatrix, random_positive_definite
from rnda.special import mv_gamma_log, spectral_constant_log
from rnda.wishart import (WishartParams, eigen_joint_density_central_log, gw_density_log,
                          inv_gw_density_log, lambda_max_cdf_central, noncentral_log_ratio,
                          smax_cdf_central_log, wishart_density_log)

BETAS = [1, 2, 4, 8]
ASSOCIATIVE = [1, 2, 4]


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def scalar(value, beta):
    return HermitianMatrix.from_spectrum([value], beta)


def scalar_params(beta, n, sigma, omega=0.0):
    M = None if omega == 0 else scalar(omega * sigma, beta)
    return WishartParams(n, scalar(sigma, beta), noncentrality=M)


def random_params(rng, m, beta, noncentral):
    sigma = random_positive_definite(m, beta, rng)
    n = m + 1 + int(rng.integers(0, 4))
    if not noncentral:
        return WishartParams(n, sigma)
    M = random_positive_definite(m, beta, rng, floor=0.0).scaled(0.5)
    return WishartParams(n, sigma, noncentrality=M)


def test_chi_square_example():
    p = scalar_params(1, 2, 1.0)
    assert_allclose(wishart_density_log(scalar(1.0, 1), p), math.log(0.5 * math.exp(-0.5)),
                    rtol=1e-13)
    h = normal_generator(1)
    assert_allclose(gw_density_log(scalar(1.0, 1), p, h), -1.1931471805599454, rtol=1e-12)


def test_complex_scalar_is_gamma():
    n, sigma2, s = 3.0, 1.7, 2.2
    p = scalar_params(2, n, sigma2)
    expected = (n - 1) * math.log(s) - s / sigma2 - math.lgamma(n) - n * math.log(sigma2)
    assert_allclose(wishart_density_log(scalar(s, 2), p), expected, rtol=1e-13)


@pytest.mark.parametrize('beta', BETAS)
@pytest.mark.parametrize('s', [0.3, 1.0, 4.5, 9.0])
def test_scalar_densities(beta, s):
    n, sigma, omega = 3, 1.5, 0.8
    central = stats.gamma(a=beta * n / 2.0, scale=2.0 * sigma / beta)
    noncentral = stats.ncx2(df=beta * n, nc=beta * omega, scale=sigma / beta)
    S = scalar(s, beta)
    assert_allclose(wishart_density_log(S, scalar_params(beta, n, sigma)),
                    central.logpdf(s), rtol=1e-10)
    assert_allclose(wishart_density_log(S, scalar_params(beta, n, sigma, omega)),
                    noncentral.logpdf(s), rtol=1e-8)


@pytest.mark.parametrize('beta', BETAS)
def test_scalar_inverse_density(beta):
    n, sigma = 3, 1.5
    p = scalar_params(beta, n, sigma)
    oracle = stats.invgamma(a=beta * n / 2.0, scale=beta / (2.0 * sigma))
    h = normal_generator(beta)
    for w in (0.1, 0.5, 2.0):
        assert_allclose(inv_gw_density_log(scalar(w, beta), p, h), oracle.logpdf(w),
                        rtol=1e-10)


@pytest.mark.parametrize('beta', ASSOCIATIVE)
def test_omega_zero_collapses(beta, rng):
    p = random_params(rng, 3, beta, noncentral=False)
    S = random_positive_definite(3, beta, rng)
    ctrl = SeriesControl()
    a = gw_density_log(S, p, normal_generator(beta), ctrl)
    b = wishart_density_log(S, p, ctrl)
    assert_allclose(a, b, rtol=1e-12)
    assert ctrl.diagnostics.degree == 0
    zero = WishartParams(p.n, p.sigma, HermitianMatrix.zeros(3, beta))
    assert zero.is_central
    assert wishart_density_log(S, zero) == b


@pytest.mark.parametrize('beta', ASSOCIATIVE)
@pytest.mark.parametrize('m', [1, 2, 3])
def test_generator_path_matches_0f1(beta, m, rng):
    for noncentral in (False, True):
        p = random_params(rng, m, beta, noncentral)
        S = random_positive_definite(m, beta, rng)
        assert_allclose(gw_density_log(S, p, normal_generator(beta)),
                        wishart_density_log(S, p), rtol=1e-10)


@pytest.mark.parametrize('beta', ASSOCIATIVE)
@pytest.mark.parametrize('m', [1, 2, 3])
def test_inverse_identity(beta, m, rng):
    h = normal_generator(beta)
    for noncentral in (False, True):
        p = random_params(rng, m, beta, noncentral)
        S = random_positive_definite(m, beta, rng)
        lhs = inv_gw_density_log(S.inverse(), p, h)
        rhs = gw_density_log(S, p, h) + (beta * (m - 1) + 2) * S.logdet()
        assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_inverse_at_identity():
    p = WishartParams(4, HermitianMatrix.identity(2, 2))
    h = normal_generator(2)
    eye = HermitianMatrix.identity(2, 2)
    assert_allclose(inv_gw_density_log(eye, p, h), gw_density_log(eye, p, h), rtol=1e-12)


def test_octonion_spectra_identity():
    # beta = 8 from spectra and log-determinants only
    sigma = HermitianMatrix.from_spectrum([2.0, 1.0], 8, logdet=math.log(2.0))
    p = WishartParams(3, sigma)
    S = HermitianMatrix.from_spectrum([1.5, 0.4], 8, logdet=math.log(0.6))
    h = normal_generator(8)
    lhs = inv_gw_density_log(S.inverse(), p, h)
    rhs = gw_density_log(S, p, h) + (8 + 2) * S.logdet()
    assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


@pytest.mark.parametrize('beta', ASSOCIATIVE)
@pytest.mark.parametrize('c', [0.5, 2.0])
def test_scale_equivariance(beta, c, rng):
    m = 3
    dim = m + beta * m * (m - 1) / 2.0
    for noncentral in (False, True):
        p = random_params(rng, m, beta, noncentral)
        S = random_positive_definite(m, beta, rng)
        M = None if p.is_central else p.noncentrality.scaled(c)
        scaled = WishartParams(p.n, p.sigma.scaled(c), noncentrality=M)
        assert_allclose(wishart_density_log(S.scaled(c), scaled),
                        wishart_density_log(S, p) - dim * math.log(c), rtol=0, atol=1e-10)


@pytest.mark.parametrize('beta', [1, 2])
def test_unitary_invariance(beta, rng):
    p = WishartParams(4, HermitianMatrix.identity(3, beta))
    S = random_positive_definite(3, beta, rng)
    z = rng.standard_normal((3, 3))
    if beta == 2:
        z = z + 1j * rng.standard_normal((3, 3))
    q, _ = np.linalg.qr(z)
    U = AlgebraMatrix.from_complex(q, beta)
    rotated = U @ S @ U.conj_transpose()
    T = HermitianMatrix(rotated.planes, beta, atol=1e-9)
    assert_allclose(wishart_density_log(T, p), wishart_density_log(S, p), rtol=0, atol=1e-10)


def test_from_mean(rng):
    beta = 2
    sigma = random_positive_definite(2, beta, rng)
    mu = AlgebraMatrix(rng.standard_normal((beta, 4, 2)), beta)
    p = WishartParams.from_mean(4, sigma, mu)
    expected = (mu.conj_transpose() @ mu).planes
    assert_allclose(p.noncentrality.planes, expected, atol=1e-12)
    assert_allclose((p.sigma @ p.omega).planes, expected, atol=1e-10)
    with pytest.raises(DimensionError):
        WishartParams.from_mean(5, sigma, mu)


def test_parameter_checks():
    sigma = HermitianMatrix.identity(3, 1)
    with pytest.raises(DomainError):
        WishartParams(1.5, sigma)
    with pytest.raises(DomainError):
        WishartParams(4, HermitianMatrix.from_real(np.diag([1.0, -1.0, 1.0]), 1))
    skew = HermitianMatrix.from_real([[1.0, 0.0], [0.0, 2.0]], 1)
    with pytest.raises(DomainError):
        WishartParams(3, skew, HermitianMatrix.from_real([[0.0, 1.0], [1.0, 0.0]], 1))
    with pytest.raises(DomainError):
        WishartParams(3, HermitianMatrix.identity(2, 1),
                      noncentrality=HermitianMatrix.from_real(np.diag([1.0, -1.0]), 1))


def test_density_needs_positive_definite():
    p = WishartParams(3, HermitianMatrix.identity(2, 1))
    S = HermitianMatrix.from_real(np.diag([1.0, 0.0]), 1)
    with pytest.raises(DomainError):
        wishart_density_log(S, p)
    with pytest.raises(DimensionError):
        wishart_density_log(HermitianMatrix.identity(3, 1), p)


# -------------------------------------------------------------------------
# eigenvalues and CDFs


@pytest.mark.parametrize('beta', BETAS)
def test_joint_density_scalar(beta):
    p = scalar_params(beta, 3, 1.2)
    assert_allclose(eigen_joint_density_central_log([2.5], p),
                    wishart_density_log(scalar(2.5, beta), p), rtol=1e-12)


@pytest.mark.parametrize('beta', BETAS)
def test_joint_density_scalar_sigma(beta):
    m, n, c = 3, 4, 1.5
    lam = np.array([3.0, 1.2, 0.4])
    sigma = HermitianMatrix.from_spectrum([c] * m, beta, logdet=m * math.log(c))
    p = WishartParams(n, sigma)
    expected = (spectral_constant_log(m, beta)
                - (beta * m * n / 2.0) * math.log(2.0 / beta)
                - mv_gamma_log(beta * n / 2.0, m, beta)
                - (beta * n / 2.0) * m * math.log(c)
                + (beta * (n - m + 1) / 2.0 - 1.0) * np.log(lam).sum()
                + beta * sum(math.log(lam[i] - lam[j]) for i in range(m) for j in range(i + 1, m))
                - beta / (2.0 * c) * lam.sum())
    assert_allclose(eigen_joint_density_central_log(lam, p), expected, rtol=1e-12)


def test_joint_density_ties():
    p = WishartParams(3, HermitianMatrix.identity(2, 1))
    ctrl = SeriesControl()
    assert eigen_joint_density_central_log([1.0, 1.0], p, ctrl) == -np.inf
    assert ctrl.diagnostics.notes


def test_joint_density_integrates_to_one():
    p = WishartParams(3, HermitianMatrix.identity(2, 1))

    def integrand(l2, l1):
        if l2 >= l1:
            return 0.0
        return math.exp(eigen_joint_density_central_log([l1, l2], p))

    mass, _ = dblquad(integrand, 0.0, np.inf, lambda l1: 0.0, lambda l1: l1,
                      epsabs=1e-9, epsrel=1e-7)
    assert mass == pytest.approx(1.0, abs=1e-3)


def test_lambda_max_matches_joint_density():
    p = WishartParams(3, HermitianMatrix.identity(2, 1))
    y = 4.0

    def integrand(l2, l1):
        if l2 >= l1:
            return 0.0
        return math.exp(eigen_joint_density_central_log([l1, l2], p))

    mass, _ = dblquad(integrand, 0.0, y, lambda l1: 0.0, lambda l1: l1,
                      epsabs=1e-10, epsrel=1e-8)
    assert lambda_max_cdf_central(y, p) == pytest.approx(mass, abs=1e-4)


def test_noncentral_rejected():
    M = HermitianMatrix.from_real(np.diag([0.5, 0.1]), 1)
    p = WishartParams(3, HermitianMatrix.identity(2, 1), noncentrality=M)
    with pytest.raises(ParameterError):
        eigen_joint_density_central_log([2.0, 1.0], p)
    with pytest.raises(ParameterError):
        lambda_max_cdf_central(1.0, p)


def test_smax_example():
    p = scalar_params(1, 2, 1.0)
    assert_allclose(smax_cdf_central_log(scalar(1.0, 1), p), math.log(1 - math.exp(-0.5)),
                    rtol=1e-12)


@pytest.mark.parametrize('beta', BETAS)
def test_scalar_cdf_is_gamma(beta):
    n, sigma = 2.5, 0.8
    p = scalar_params(beta, n, sigma)
    ctrl = SeriesControl(max_degree=150)
    for y in np.linspace(0.25, 8.0, 12):
        assert_allclose(lambda_max_cdf_central(y, p, ctrl),
                        gammainc(beta * n / 2.0, beta * y / (2.0 * sigma)), rtol=1e-8)


def test_smax_vanishes_for_small_delta():
    p = WishartParams(4, HermitianMatrix.from_real(np.diag([1.0, 0.5]), 2))
    values = [smax_cdf_central_log(HermitianMatrix.identity(2, 2).scaled(t), p)
              for t in (1.0, 0.1, 0.01, 1e-3)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert values[-1] < -30


@pytest.mark.parametrize('beta', ASSOCIATIVE)
def test_lambda_max_monotone_and_bounded(beta):
    p = WishartParams(4, HermitianMatrix.from_real(np.diag([1.0, 0.5]), beta))
    ctrl = SeriesControl(max_degree=150)
    values = [lambda_max_cdf_central(y, p, ctrl) for y in np.linspace(0.5, 8.0, 10)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_lambda_max_tends_to_one():
    p = WishartParams(3, HermitianMatrix.identity(2, 1))
    ctrl = SeriesControl(max_degree=200)
    assert lambda_max_cdf_central(40.0, p, ctrl) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        lambda_max_cdf_central(0.0, p)


# -------------------------------------------------------------------------
# batched noncentral ratio


def test_log_ratio_central_is_zero():
    p = WishartParams(3, HermitianMatrix.identity(2, 2))
    S = np.stack([HermitianMatrix.identity(2, 2).planes] * 4)
    assert_allclose(noncentral_log_ratio(S, p), np.zeros(4))


def test_log_ratio_scalar():
    n, omega = 3, 0.7
    p = scalar_params(1, n, 1.0, omega)
    s = np.array([0.5, 1.0, 3.0, 7.5])
    expected = stats.ncx2(df=n, nc=omega).logpdf(s) - stats.chi2(df=n).logpdf(s)
    assert_allclose(noncentral_log_ratio(s.reshape(4, 1, 1, 1), p), expected, rtol=1e-9)


@pytest.mark.parametrize('beta', ASSOCIATIVE)
def test_log_ratio_matches_densities(beta, rng):
    p = random_params(rng, 2, beta, noncentral=True)
    central = WishartParams(p.n, p.sigma)
    mats = [random_positive_definite(2, beta, rng) for _ in range(3)]
    ratio = noncentral_log_ratio(np.stack([S.planes for S in mats]), p)
    for value, S in zip(ratio, mats):
        assert_allclose(value, wishart_density_log(S, p) - wishart_density_log(S, central),
                        rtol=1e-10, atol=1e-12)
    with pytest.raises(DimensionError):
        noncentral_log_ratio(np.zeros((3, beta, 3, 3)), p)
