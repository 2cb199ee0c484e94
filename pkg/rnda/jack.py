import logging
import math
from functools import lru_cache
from itertools import product
from types import MappingProxyType

import numpy as np

from .errors import DimensionError, DomainError
from .special import AlgebraDim, Partition, enumerate_partitions

"""
Jack polynomials C_kappa^beta of a real spectrum, in the normalisation
where every degree layer sums to (tr X)^k.

The values are built one variable at a time with the branching rule of
the monic (P) Jack polynomials,

    P_kappa(x_1..x_v) = sum_mu psi_{kappa/mu} P_mu(x_1..x_{v-1}) x_v^{|kappa|-|mu|}

over horizontal strips kappa/mu, and the P -> C conversion constant is
folded into the branching coefficients. The coefficients depend only on
the partitions and beta, so they are cached once per layer and every new
spectrum only pays for the sums.
"""

__all__ = ['Spectrum', 'JackTable', 'JackLayers', 'jack_C', 'jack_layer',
           'jack_C_identity_log', 'clear_cache']

logger = logging.getLogger(__name__)


class Spectrum:
    '''
    Eigenvalues of a Hermitian matrix, kept in decreasing order.

    Parameters
    ----------
    values : array-like
        the eigenvalues, in any order; negative values are allowed
    '''

    def __init__(self, values):
        values = np.array(values, dtype=np.float64, copy=True).ravel()
        if not np.all(np.isfinite(values)):
            raise DomainError(f"Spectrum entries must be finite: {values}")
        self._values = np.sort(values)[::-1]

    @property
    def values(self):
        return self._values.copy()

    @property
    def m(self):
        return self._values.shape[0]

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self._values.tolist())

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def trace(self):
        return float(np.sum(self._values))

    def scaled(self, c):
        return Spectrum(c * self._values)

    def padded(self, count=1):
        '''Append `count` zero eigenvalues'''
        return Spectrum(np.concatenate([self._values, np.zeros(count)]))

    def __repr__(self):
        return f"<Spectrum(m={self.m}, values={np.array2string(self._values)})>"


def _as_batch(x):
    '''(N, m) array from a Spectrum, a 1-d sequence or a 2-d array'''
    if isinstance(x, Spectrum):
        return x._values[None, :]
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = Spectrum(arr)._values[None, :]
    elif arr.ndim != 2:
        raise DimensionError(f"Expected one or a stack of spectra; got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("Spectrum entries must be finite")
    return arr


# -------------------------------------------------------------------------
# cached combinatorics


def _part(parts, i):
    return parts[i] if i < len(parts) else 0


def _b(arm, leg, alpha):
    return (alpha * arm + leg + 1.0) / (alpha * (arm + 1.0) + leg)


@lru_cache(maxsize=None)
def _c_normalization_log(kappa, alpha):
    '''log of K_kappa in C_kappa = K_kappa P_kappa'''
    k = kappa.weight
    conj = kappa.conjugate()
    total = math.lgamma(k + 1) + k * math.log(alpha)
    for i, j in kappa.cells():
        arm = kappa[i] - j - 1
        leg = conj[j] - i - 1
        total -= math.log(alpha * (arm + 1) + leg)
    return total


@lru_cache(maxsize=None)
def _psi_log(kappa, mu, alpha):
    '''log of the P branching coefficient for the horizontal strip kappa/mu'''
    kconj = kappa.conjugate()
    mconj = mu.conjugate()
    rows = [i for i in range(len(kappa)) if kappa[i] != _part(mu, i)]
    cols = {j for j in range(_part(kappa, 0)) if kconj[j] != _part(mconj, j)}
    ratio = 1.0
    # only cells of mu in a row of the strip but outside its columns survive
    for i in rows:
        mu_i = _part(mu, i)
        for j in range(mu_i):
            if j in cols:
                continue
            leg = mconj[j] - i - 1
            ratio *= _b(mu_i - j - 1, leg, alpha) / _b(kappa[i] - j - 1, leg, alpha)
    return math.log(ratio)


@lru_cache(maxsize=None)
def _layer_partitions(level, k):
    return tuple(enumerate_partitions(k, level))


@lru_cache(maxsize=None)
def _layer_offset(level, k):
    return sum(len(_layer_partitions(level, w)) for w in range(k))


@lru_cache(maxsize=None)
def _layer_position(level, k):
    return {p: i for i, p in enumerate(_layer_partitions(level, k))}


class _LayerPlan:

    def __init__(self, mu_index, powers, coefs, starts):
        self.mu_index = np.asarray(mu_index, dtype=np.intp)
        self.powers = np.asarray(powers, dtype=np.float64)
        self.coefs = np.asarray(coefs, dtype=np.float64)
        self.starts = np.asarray(starts, dtype=np.intp)


@lru_cache(maxsize=None)
def _layer_plan(level, k, alpha):
    '''
    Everything needed to build the weight-k layer with `level` variables
    from the values with one variable fewer.
    '''
    mu_index, powers, coefs, starts = [], [], [], []
    for kappa in _layer_partitions(level, k):
        starts.append(len(mu_index))
        padded = tuple(kappa) + (0,) * (level - len(kappa))
        ranges = [range(padded[i + 1], padded[i] + 1) for i in range(level - 1)]
        log_norm = _c_normalization_log(kappa, alpha)
        for parts in product(*ranges):
            mu = Partition(parts)
            w = mu.weight
            mu_index.append(_layer_offset(level - 1, w)
                            + _layer_position(level - 1, w)[mu])
            powers.append(k - w)
            coefs.append(math.exp(_psi_log(kappa, mu, alpha) + log_norm
                                  - _c_normalization_log(mu, alpha)))
    return _LayerPlan(mu_index, powers, coefs, starts)


def clear_cache():
    '''Drop the cached branching coefficients, layer plans and identity values'''
    for fn in (_layer_plan, _psi_log, _c_normalization_log, _identity_log):
        cache_clear = getattr(fn, 'cache_clear', None)
        if cache_clear is not None:
            cache_clear()


# -------------------------------------------------------------------------
# evaluation


class JackLayers:
    '''
    Lazily computed Jack layers for a stack of spectra.

    Each spectrum is divided by its largest absolute eigenvalue before the
    recursion runs, so the stored values stay near one; `layer(k)` puts the
    scale back, `scaled(k)` and `log_scale` let callers do it in log space.

    Parameters
    ----------
    x : `Spectrum`, 1-d or (N, m) array
        the spectra; all of the same length m
    beta : int or `AlgebraDim`
    '''

    def __init__(self, x, beta):
        self._logger = logging.getLogger(__name__)
        self.beta = AlgebraDim.coerce(beta)
        self.alpha = self.beta.alpha

        x = _as_batch(x)
        self.count, self.m = x.shape
        scale = np.max(np.abs(x), axis=1) if self.m else np.zeros(self.count)
        scale = np.where(scale > 0, scale, 1.0)
        self.log_scale = np.log(scale)
        self._x = x / scale[:, None]
        self._abs_trace = np.sum(np.abs(self._x), axis=1)
        self._trace = np.sum(self._x, axis=1)

        # levels[v] holds the layers computed with v variables
        self._levels = [[np.ones((1, self.count))] for _ in range(self.m + 1)]
        self._stacked = [None] * (self.m + 1)
        self._done = 0

    @property
    def max_weight(self):
        return self._done

    def partitions(self, k):
        return _layer_partitions(self.m, k)

    def _extend(self, k):
        while self._done < k:
            w = self._done + 1
            self._levels[0].append(np.zeros((0, self.count)))
            self._stacked[0] = np.concatenate(self._levels[0])
            for level in range(1, self.m + 1):
                plan = _layer_plan(level, w, self.alpha)
                prev = self._stacked[level - 1]
                xv = self._x[:, level - 1]
                contrib = (plan.coefs[:, None] * xv[None, :] ** plan.powers[:, None]
                           * prev[plan.mu_index])
                self._levels[level].append(np.add.reduceat(contrib, plan.starts, axis=0))
                self._stacked[level] = np.concatenate(self._levels[level])
            self._done = w
            if __debug__:
                self._check_layer(w)
        if self._stacked[self.m] is None:
            for level in range(self.m + 1):
                self._stacked[level] = np.concatenate(self._levels[level])

    def _check_layer(self, k):
        total = np.sum(self._levels[self.m][k], axis=0)
        expected = self._trace ** k
        bound = 1e-9 * np.maximum(self._abs_trace ** k, 1e-300)
        if np.any(np.abs(total - expected) > bound):
            self._logger.warning("Jack layer %d does not sum to (tr X)^%d", k, k)

    def scaled(self, k):
        '''(P_k, N) array of C_kappa(x / scale) for the weight-k partitions'''
        if k < 0:
            raise DomainError("Layer weight must be >= 0")
        if self.m == 0:
            return np.ones((1, self.count)) if k == 0 else np.zeros((0, self.count))
        self._extend(k)
        return self._levels[self.m][k]

    def layer(self, k):
        '''(P_k, N) array of C_kappa(x)'''
        return self.scaled(k) * np.exp(k * self.log_scale)[None, :]


class JackTable:
    '''
    Every C_kappa^beta(x) with |kappa| <= max_weight for one spectrum. The
    table is filled on construction and read-only afterwards, so one table
    can be shared between threads.

    Parameters
    ----------
    x : `Spectrum` or array-like
    beta : int or `AlgebraDim`
    max_weight : int
    '''

    def __init__(self, x, beta, max_weight):
        if max_weight < 0:
            raise DomainError("max_weight must be >= 0")
        self.spectrum = x if isinstance(x, Spectrum) else Spectrum(x)
        self.beta = AlgebraDim.coerce(beta)
        self.max_weight = int(max_weight)
        self.m = self.spectrum.m

        layers = JackLayers(self.spectrum, self.beta)
        self.log_scale = float(layers.log_scale[0])
        self._scaled = tuple(layers.scaled(k)[:, 0].copy()
                             for k in range(self.max_weight + 1))
        for arr in self._scaled:
            arr.flags.writeable = False
        values = {}
        for k, arr in enumerate(self._scaled):
            factor = math.exp(k * self.log_scale)
            for kappa, val in zip(_layer_partitions(self.m, k), arr):
                values[kappa] = float(val) * factor
        self._values = MappingProxyType(values)

    @property
    def values(self):
        return self._values

    def partitions(self, k):
        return _layer_partitions(self.m, k)

    def scaled(self, k):
        if k > self.max_weight:
            raise DomainError(f"JackTable only holds weights <= {self.max_weight}")
        return self._scaled[k]

    def layer(self, k):
        return {kappa: self._values[kappa] for kappa in self.partitions(k)}

    def __repr__(self):
        return (f"<JackTable(m={self.m}, beta={int(self.beta)}, "
                f"max_weight={self.max_weight})>")


def jack_layer(k, x, beta):
    '''
    C_kappa^beta(x) for every partition of `k` with at most m parts.

    Returns
    -------
    out : dict
        `Partition` -> value; the values sum to (tr X)^k
    '''
    x = x if isinstance(x, Spectrum) else Spectrum(x)
    layers = JackLayers(x, beta)
    values = layers.layer(k)[:, 0]
    return {kappa: float(v) for kappa, v in zip(layers.partitions(k), values)}


def jack_C(kappa, x, beta):
    '''
    Value of the Jack polynomial C_kappa^beta at the spectrum `x`; zero when
    kappa has more parts than there are eigenvalues.
    '''
    kappa = Partition(kappa)
    x = x if isinstance(x, Spectrum) else Spectrum(x)
    if kappa.length > x.m:
        return 0.0
    return jack_layer(kappa.weight, x, beta)[kappa]


@lru_cache(maxsize=None)
def _identity_log(kappa, m, alpha):
    conj = kappa.conjugate()
    total = _c_normalization_log(kappa, alpha)
    for i, j in kappa.cells():
        arm = kappa[i] - j - 1
        leg = conj[j] - i - 1
        total += math.log(m - i + alpha * j) - math.log(alpha * arm + leg + 1.0)
    return total


def jack_C_identity_log(kappa, m, beta):
    '''
    log C_kappa^beta(I_m), from the closed form of J_kappa at the identity
    '''
    kappa = Partition(kappa)
    if kappa.length > m:
        return -np.inf
    return _identity_log(kappa, int(m), AlgebraDim.coerce(beta).alpha)
