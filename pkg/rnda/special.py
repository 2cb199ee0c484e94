import math
from enum import IntEnum

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

"""
Scalar special functions shared by everything else: partitions, the
generalised Pochhammer symbol, the multivariate gamma function over the
four normed division algebras and the Stiefel manifold volume. Anything
gamma-like is returned as a logarithm.
"""

__all__ = ['AlgebraDim', 'Partition', 'enumerate_partitions',
           'gen_pochhammer', 'gen_pochhammer_log', 'mv_gamma_log',
           'stiefel_volume_log', 'tau', 'spectral_constant_log']


class AlgebraDim(IntEnum):
    '''
    Real dimension of the division algebra the matrices live in.
    '''

    REAL = 1
    COMPLEX = 2
    QUATERNION = 4
    OCTONION = 8

    @classmethod
    def coerce(cls, beta):
        '''Turn an int (or an `AlgebraDim`) into an `AlgebraDim`'''
        try:
            return cls(int(beta))
        except (ValueError, TypeError):
            raise DomainError(f"beta must be one of 1, 2, 4, 8; got {beta!r}")

    @property
    def alpha(self):
        '''Jack parameter 2/beta'''
        return 2.0 / int(self)

    def tau(self, m):
        return tau(m, self)


class Partition(tuple):
    '''
    A non-increasing tuple of non-negative integers. Trailing zeros are
    dropped, so (2, 1, 0) and (2, 1) are the same partition.
    '''

    def __new__(cls, parts=()):
        parts = tuple(int(k) for k in parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(k < 0 for k in parts):
            raise DomainError(f"Partition parts must be non-negative: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"Partition parts must be non-increasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self):
        return sum(self)

    @property
    def length(self):
        '''number of nonzero parts'''
        return len(self)

    def conjugate(self):
        '''Transpose of the Young diagram'''
        if not self:
            return Partition()
        return Partition(sum(1 for k in self if k > j) for j in range(self[0]))

    def cells(self):
        '''(i, j) pairs of the diagram, 0-based, row by row'''
        for i, k in enumerate(self):
            for j in range(k):
                yield i, j

    def __repr__(self):
        return f"Partition{tuple(self)}"


def _partitions(k, max_part, max_parts):
    if k == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(k, max_part), 0, -1):
        # the rest can hold at most first * (max_parts - 1)
        if first * max_parts < k:
            break
        for rest in _partitions(k - first, first, max_parts - 1):
            yield (first,) + rest


def enumerate_partitions(k, max_parts):
    '''
    All partitions of `k` with at most `max_parts` parts, in
    lexicographically decreasing order.

    Parameters
    ----------
    k : int
        the weight
    max_parts : int
        the largest allowed number of nonzero parts; 0 is accepted and
        yields only the empty partition for k = 0

    Returns
    -------
    out : list of `Partition`
    '''
    if k < 0 or max_parts < 0:
        raise DomainError("Need k >= 0 and max_parts >= 0")
    return [Partition(p) for p in _partitions(int(k), int(k), int(max_parts))]


def _row_shifts(kappa, beta):
    beta = AlgebraDim.coerce(beta)
    return [(i * int(beta)) / 2.0 for i in range(len(kappa))]


def gen_pochhammer(a, kappa, beta):
    '''
    Generalised Pochhammer symbol [a]_kappa = prod_i (a - (i-1)beta/2)_{k_i}
    '''
    kappa = Partition(kappa)
    value = 1.0
    for shift, k in zip(_row_shifts(kappa, beta), kappa):
        value *= float(np.prod(a - shift + np.arange(k)))
    return value


def gen_pochhammer_log(a, kappa, beta):
    '''
    Sign and log-magnitude of the generalised Pochhammer symbol. The sign is
    0 (and the log is -inf) when one of the rising factors vanishes.
    '''
    kappa = Partition(kappa)
    sign = 1.0
    log_abs = 0.0
    for shift, k in zip(_row_shifts(kappa, beta), kappa):
        factors = a - shift + np.arange(k)
        if np.any(factors == 0):
            return 0.0, -np.inf
        sign *= float(np.prod(np.sign(factors)))
        log_abs += float(np.sum(np.log(np.abs(factors))))
    return sign, log_abs


def mv_gamma_log(a, m, beta):
    '''
    Log of the multivariate gamma function

        Gamma_m^beta[a] = pi^{m(m-1)beta/4} prod_{i=1}^m Gamma(a - (i-1)beta/2)

    defined for a > (m-1)beta/2.
    '''
    beta = AlgebraDim.coerce(beta)
    if m < 1:
        raise DomainError(f"m must be >= 1; got {m}")
    bound = (m - 1) * int(beta) / 2.0
    if not a > bound:
        raise DomainError(
            f"multivariate gamma needs a > {bound:g} for m={m}, beta={int(beta)};"
            f" got a={a:g}")
    shifts = np.arange(m) * int(beta) / 2.0
    return (m * (m - 1) * int(beta) / 4.0 * math.log(math.pi)
            + float(np.sum(gammaln(a - shifts))))


def stiefel_volume_log(m, n, beta):
    '''
    Log-volume of the Stiefel manifold of n x m matrices with orthonormal
    columns over the algebra: 2^m pi^{mn beta/2} / Gamma_m^beta[n beta/2]
    '''
    beta = AlgebraDim.coerce(beta)
    if m < 1 or n < m:
        raise DomainError(f"Stiefel manifold needs n >= m >= 1; got m={m}, n={n}")
    return (m * math.log(2.0) + m * n * int(beta) / 2.0 * math.log(math.pi)
            - mv_gamma_log(n * int(beta) / 2.0, m, beta))


_TAU_FACTOR = {1: 0, 2: -1, 4: -2, 8: -4}


def tau(m, beta):
    '''
    The pi exponent appearing in the SVD and spectral-decomposition
    Jacobians: 0, -m, -2m, -4m for beta = 1, 2, 4, 8.
    '''
    beta = AlgebraDim.coerce(beta)
    if m < 1:
        raise DomainError(f"m must be >= 1; got {m}")
    return _TAU_FACTOR[int(beta)] * m


def spectral_constant_log(m, beta):
    '''
    Log of the constant left after integrating the eigenvector part of
    the spectral decomposition out of a density:

        pi^{beta m(m-1)/2} Gamma(beta/2)^m / Gamma_m^beta[beta m/2]

    For beta in (1, 2, 4) this is pi^{beta m^2/2 + tau} / Gamma_m^beta[beta m/2].
    For beta = 8 the tau form is short by 6^m and no longer reduces to the
    m = 1 density, so the Gamma(beta/2) form is used for every beta.
    '''
    beta = AlgebraDim.coerce(beta)
    b = int(beta)
    return (b * m * (m - 1) / 2.0 * math.log(math.pi)
            + m * math.lgamma(b / 2.0)
            - mv_gamma_log(b * m / 2.0, m, beta))
