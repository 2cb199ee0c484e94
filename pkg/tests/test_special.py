import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import multigammaln

from rnda.errors import DomainError
from rnda.special import (AlgebraDim, Partition, enumerate_partitions, gen_pochhammer,
                          gen_pochhammer_log, mv_gamma_log, spectral_constant_log,
                          stiefel_volume_log, tau)

BETAS = [1, 2, 4, 8]


def brute_partitions(k, max_parts):
    '''every partition of k with at most max_parts parts, by plain recursion'''
    out = set()

    def rec(remaining, largest, parts):
        if remaining == 0:
            out.add(tuple(parts))
            return
        if len(parts) == max_parts:
            return
        for first in range(1, min(remaining, largest) + 1):
            rec(remaining - first, first, parts + [first])

    rec(k, k, [])
    return out


def test_algebra_dim():
    assert AlgebraDim.coerce(4) is AlgebraDim.QUATERNION
    assert AlgebraDim.coerce(AlgebraDim.REAL).alpha == 2.0
    assert AlgebraDim.OCTONION.tau(2) == -8
    with pytest.raises(DomainError):
        AlgebraDim.coerce(3)


def test_partition_normalises():
    assert Partition((2, 1, 0, 0)) == Partition((2, 1))
    assert Partition((3, 1, 1)).weight == 5
    assert Partition((3, 1, 1)).length == 3
    assert Partition((3, 1)).conjugate() == Partition((2, 1, 1))
    assert Partition().conjugate() == Partition()
    assert list(Partition((2, 1)).cells()) == [(0, 0), (0, 1), (1, 0)]
    with pytest.raises(DomainError):
        Partition((1, 2))
    with pytest.raises(DomainError):
        Partition((2, -1))


@pytest.mark.parametrize('k, max_parts, expected', [
    (0, 3, [()]),
    (3, 2, [(3,), (2, 1)]),
])
def test_enumerate_examples(k, max_parts, expected):
    assert [tuple(p) for p in enumerate_partitions(k, max_parts)] == expected


def test_enumerate_counts_four():
    assert len(enumerate_partitions(4, 4)) == 5


@pytest.mark.parametrize('k', range(11))
def test_enumerate_matches_brute_force(k):
    for max_parts in range(1, k + 2):
        parts = enumerate_partitions(k, max_parts)
        assert len(set(parts)) == len(parts)
        assert {tuple(p) for p in parts} == brute_partitions(k, max_parts)
        # lexicographically decreasing
        assert [tuple(p) for p in parts] == sorted((tuple(p) for p in parts), reverse=True)


def test_enumerate_rejects_negative():
    with pytest.raises(DomainError):
        enumerate_partitions(-1, 2)


@pytest.mark.parametrize('beta', BETAS)
def test_pochhammer_trivial(beta):
    assert gen_pochhammer(1.7, (1,), beta) == pytest.approx(1.7)
    assert gen_pochhammer(1.7, (), beta) == 1.0


def test_pochhammer_example():
    assert gen_pochhammer(2, (2, 1), 2) == pytest.approx(6.0)


@pytest.mark.parametrize('beta', BETAS)
def test_pochhammer_first_row_recurrence(beta):
    for a in (0.3, 2.5, 7.25):
        for kappa in [(2,), (3, 1), (2, 2, 1)]:
            grown = (kappa[0] + 1,) + kappa[1:]
            assert_allclose(gen_pochhammer(a, grown, beta),
                            gen_pochhammer(a, kappa, beta) * (a + kappa[0]), rtol=1e-13)


def test_pochhammer_log_sign_and_zero():
    sign, log_abs = gen_pochhammer_log(-0.5, (2,), 1)
    assert sign == -1.0
    assert_allclose(log_abs, math.log(0.25))
    # second row shifts a by -1/2 at beta = 1
    sign, log_abs = gen_pochhammer_log(0.5, (1, 1), 1)
    assert sign == 0.0
    assert log_abs == -np.inf


@pytest.mark.parametrize('beta', BETAS)
def test_mv_gamma_scalar(beta):
    assert_allclose(mv_gamma_log(3.3, 1, beta), math.lgamma(3.3), rtol=1e-14)


def test_mv_gamma_examples():
    assert_allclose(mv_gamma_log(2, 2, 2), math.log(math.pi), rtol=1e-14)
    with pytest.raises(DomainError):
        mv_gamma_log(1, 3, 1)


@pytest.mark.parametrize('m', [1, 2, 3, 5])
def test_mv_gamma_matches_scipy_real(m):
    for a in (m / 2.0 + 0.1, 4.0, 11.5):
        assert_allclose(mv_gamma_log(a, m, 1), multigammaln(a, m), rtol=1e-12)


@pytest.mark.parametrize('beta', BETAS)
@pytest.mark.parametrize('m', [1, 2, 4])
def test_mv_gamma_recurrence(beta, m):
    a = (m - 1) * beta / 2.0 + 0.75
    shifts = np.arange(m) * beta / 2.0
    lhs = mv_gamma_log(a + 1, m, beta) - mv_gamma_log(a, m, beta)
    assert_allclose(lhs, np.sum(np.log(a - shifts)), rtol=1e-12)


@pytest.mark.parametrize('m, n, beta, expected', [
    (1, 2, 1, math.log(2 * math.pi)),
    (1, 3, 1, math.log(4 * math.pi)),
    (1, 1, 2, math.log(2 * math.pi)),
])
def test_stiefel_examples(m, n, beta, expected):
    assert_allclose(stiefel_volume_log(m, n, beta), expected, rtol=1e-13)


@pytest.mark.parametrize('beta', BETAS)
@pytest.mark.parametrize('m', [1, 2, 3])
def test_stiefel_square_identity(beta, m):
    total = stiefel_volume_log(m, m, beta) + mv_gamma_log(m * beta / 2.0, m, beta)
    assert_allclose(total, m * math.log(2) + m * m * beta / 2.0 * math.log(math.pi),
                    rtol=1e-13)


def test_stiefel_rejects_short():
    with pytest.raises(DomainError):
        stiefel_volume_log(3, 2, 1)


@pytest.mark.parametrize('m, beta, expected', [(3, 1, 0), (3, 2, -3), (2, 8, -8), (1, 4, -2)])
def test_tau(m, beta, expected):
    assert tau(m, beta) == expected


@pytest.mark.parametrize('beta', [1, 2, 4])
@pytest.mark.parametrize('m', [1, 2, 3])
def test_spectral_constant_tau_form(beta, m):
    tau_form = ((beta * m * m / 2.0 + tau(m, beta)) * math.log(math.pi)
                - mv_gamma_log(beta * m / 2.0, m, beta))
    assert_allclose(spectral_constant_log(m, beta), tau_form, rtol=1e-13, atol=1e-12)


@pytest.mark.parametrize('m', [1, 2, 3])
def test_spectral_constant_octonion(m):
    tau_form = ((8 * m * m / 2.0 + tau(m, 8)) * math.log(math.pi)
                - mv_gamma_log(4.0 * m, m, 8))
    assert_allclose(spectral_constant_log(m, 8) - tau_form, m * math.log(6.0), rtol=1e-12)
    # no eigenvector integral at m = 1
    assert spectral_constant_log(1, 8) == pytest.approx(0.0, abs=1e-13)
