import logging
import math
from collections import namedtuple
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, DimensionError, ParameterError
from .jack import JackLayers, Spectrum, jack_C_identity_log
from .settings import DEFAULT_MAX_DEGREE, DEFAULT_REL_TOL
from .special import AlgebraDim, enumerate_partitions, gen_pochhammer_log

"""
Hypergeometric functions of one and two matrix arguments,

    pFq(a; b; X) = sum_k sum_{kappa |- k} prod [a_i]_kappa / prod [b_j]_kappa
                   C_kappa(X) / k!

summed a whole degree layer at a time in log space. A layer is summed with
compensated arithmetic, layers are combined with a signed logsumexp.
"""

__all__ = ['SeriesControl', 'ConvergenceReport', 'HypParams', 'SeriesResult',
           'hyp_pFq', 'hyp_pFq_two', 'hyp_pFq_log_batch', 'hyp1f1_log']

logger = logging.getLogger(__name__)

SeriesResult = namedtuple('SeriesResult', ['value', 'log_abs', 'sign', 'report'])


class SeriesControl:
    '''
    Truncation settings for a partition series.

    Parameters
    ----------
    max_degree : int
        the largest layer weight that may be summed
    rel_tol : float
        a layer counts as negligible below rel_tol times the partial sum;
        the series stops after two negligible layers in a row

    Attributes
    ----------
    diagnostics : `ConvergenceReport` or None
        the report of the last evaluation run with this control
    '''

    def __init__(self, max_degree=DEFAULT_MAX_DEGREE, rel_tol=DEFAULT_REL_TOL):
        if int(max_degree) != max_degree or max_degree < 1:
            raise ParameterError(f"max_degree must be an integer >= 1; got {max_degree}")
        if not rel_tol > 0:
            raise ParameterError(f"rel_tol must be > 0; got {rel_tol}")
        self.max_degree = int(max_degree)
        self.rel_tol = float(rel_tol)
        self.diagnostics = None

    def __repr__(self):
        return f"<SeriesControl(max_degree={self.max_degree}, rel_tol={self.rel_tol:g})>"


class ConvergenceReport:
    '''
    What happened while a series was summed.

    `layer_log10[k]` is log10 of |layer k| / |final partial sum|, the worst
    case over a batch of spectra; -inf marks a layer that vanished.
    '''

    def __init__(self, degree, layer_log10, converged, notes=None):
        self.degree = int(degree)
        self.layer_log10 = [float(v) for v in layer_log10]
        self.converged = bool(converged)
        self.notes = list(notes or [])

    @property
    def last_ratios(self):
        '''the last two layer magnitudes relative to the partial sum'''
        tail = self.layer_log10[-2:]
        return tuple(10.0 ** v for v in tail)

    def note(self, message):
        self.notes.append(message)

    def to_dict(self):
        def finite(v):
            return v if math.isfinite(v) else None
        return {
            'converged': self.converged,
            'degree': self.degree,
            'layer_log10': [finite(v) for v in self.layer_log10],
            'last_ratios': [finite(v) for v in self.last_ratios],
            'notes': list(self.notes),
        }

    def __repr__(self):
        return (f"<ConvergenceReport(degree={self.degree}, "
                f"converged={self.converged})>")


class HypParams:
    '''
    Upper (a_1..a_p) and lower (b_1..b_q) parameters of a pFq series.
    '''

    def __init__(self, upper=(), lower=()):
        self.upper = tuple(float(a) for a in upper)
        self.lower = tuple(float(b) for b in lower)

    @property
    def p(self):
        return len(self.upper)

    @property
    def q(self):
        return len(self.lower)

    def check(self, m, beta, max_degree):
        '''
        Raise `ParameterError` if a lower parameter makes some [b]_kappa
        vanish for |kappa| <= max_degree with at most m parts.
        '''
        b_half = int(AlgebraDim.coerce(beta)) / 2.0
        for b in self.lower:
            for i in range(m):
                # row i holds at most max_degree // (i + 1) boxes
                j = i * b_half - b
                if j >= 0 and float(j).is_integer() and j < max_degree // (i + 1):
                    raise ParameterError(
                        f"lower parameter {b:g} gives a zero Pochhammer"
                        f" denominator in row {i + 1} for beta={int(beta)}, m={m}")

    def __repr__(self):
        return f"<HypParams(upper={list(self.upper)}, lower={list(self.lower)})>"


@lru_cache(maxsize=4096)
def _coefficient_logs(upper, lower, beta, m, k):
    '''sign and log of prod [a]_kappa / prod [b]_kappa / k! along layer k'''
    parts = enumerate_partitions(k, m)
    signs = np.ones(len(parts))
    logs = np.full(len(parts), -math.lgamma(k + 1))
    for idx, kappa in enumerate(parts):
        for a in upper:
            s, la = gen_pochhammer_log(a, kappa, beta)
            signs[idx] *= s
            logs[idx] += la
        for b in lower:
            s, lb = gen_pochhammer_log(b, kappa, beta)
            if s == 0:
                raise ParameterError(
                    f"Pochhammer denominator [{b:g}]_{tuple(kappa)} vanishes")
            signs[idx] *= s
            logs[idx] -= lb
    signs.flags.writeable = False
    logs.flags.writeable = False
    return signs, logs


@lru_cache(maxsize=4096)
def _identity_logs(m, beta, k):
    return np.array([jack_C_identity_log(kappa, m, beta)
                     for kappa in enumerate_partitions(k, m)])


class _TableLayers:
    '''`JackLayers` look-alike reading from a prebuilt `JackTable`'''

    def __init__(self, table):
        self.table = table
        self.count = 1
        self.m = table.m
        self.log_scale = np.array([table.log_scale])
        self._spill = None

    def scaled(self, k):
        if k <= self.table.max_weight:
            return self.table.scaled(k)[:, None]
        if self._spill is None:
            self._spill = JackLayers(self.table.spectrum, self.table.beta)
        return self._spill.scaled(k)


def _layers_for(x, beta, table=None):
    if table is not None:
        if int(table.beta) != int(beta):
            raise ParameterError("JackTable was built for another beta")
        return _TableLayers(table)
    return JackLayers(x, beta)


def _compensated_sum(terms):
    '''Neumaier sum of (P, N) terms over the partition axis, one column per spectrum'''
    total = np.zeros(terms.shape[1])
    carry = np.zeros(terms.shape[1])
    for row in terms:
        t = total + row
        carry += np.where(np.abs(total) >= np.abs(row), (total - t) + row, (row - t) + total)
        total = t
    return total + carry


def _layer_log(coef_sign, coef_log, scaled, log_scale_k):
    count = scaled.shape[1]
    finite = np.isfinite(coef_log)
    if not finite.any():
        return np.full(count, -np.inf), np.zeros(count)
    cmax = float(np.max(coef_log[finite]))
    weights = coef_sign * np.exp(coef_log - cmax)
    total = _compensated_sum(weights[:, None] * scaled)
    with np.errstate(divide='ignore'):
        log_abs = np.log(np.abs(total)) + cmax + log_scale_k
    return log_abs, np.sign(total)


def _signed_logsumexp(logs, signs):
    with np.errstate(divide='ignore', invalid='ignore'):
        return logsumexp(np.vstack(logs), axis=0, b=np.vstack(signs),
                         return_sign=True)


def _sum_layers(layer_fn, count, ctrl, label):
    '''
    Sum layers k = 0, 1, ... until two consecutive ones fall below
    rel_tol of the partial sum.

    Parameters
    ----------
    layer_fn : callable
        k -> (log_abs, sign), arrays of length `count`

    Returns
    -------
    log_abs, sign : `~numpy.ndarray`
    report : `ConvergenceReport`
    '''
    log_tol = math.log(ctrl.rel_tol)
    logs, signs = [], []
    converged = False
    for k in range(ctrl.max_degree + 1):
        layer_log, layer_sign = layer_fn(k)
        logs.append(layer_log)
        signs.append(layer_sign)
        if k < 2:
            continue
        partial, _ = _signed_logsumexp(logs, signs)
        small = ((logs[-1] - partial < log_tol) & (logs[-2] - partial < log_tol))
        if np.all(small | np.isneginf(partial)):
            converged = True
            break

    partial, partial_sign = _signed_logsumexp(logs, signs)
    with np.errstate(invalid='ignore'):
        rel = [np.max(layer - partial) / math.log(10.0) for layer in logs]
    rel = [v if not math.isnan(v) else -math.inf for v in rel]
    report = ConvergenceReport(len(logs) - 1, rel, converged)
    ctrl.diagnostics = report

    if not converged:
        report.note(f"{label}: layers still above rel_tol={ctrl.rel_tol:g}"
                    f" at max_degree={ctrl.max_degree}; raise --max-degree")
        logger.warning("%s did not converge by degree %d (last layer 10^%.1f)",
                       label, ctrl.max_degree, rel[-1])
        raise ConvergenceError(
            f"{label} did not converge within max_degree={ctrl.max_degree}",
            report=report)
    logger.debug("%s converged at degree %d", label, report.degree)
    return partial, partial_sign, report


def _check_region(params, x):
    radius = float(np.max(np.abs(x))) if x.size else 0.0
    if params.p == params.q + 1 and radius >= 1.0:
        raise ParameterError(
            f"{params.p}F{params.q} series diverges for spectral radius {radius:g} >= 1")
    if params.p > params.q + 1 and radius > 0.0:
        raise ParameterError(
            f"{params.p}F{params.q} series diverges for any nonzero argument")


def _as_array(x):
    if isinstance(x, Spectrum):
        return x.values[None, :]
    arr = np.asarray(x, dtype=np.float64)
    return arr[None, :] if arr.ndim == 1 else arr


def hyp_pFq_log_batch(params, x, beta, ctrl=None, layer_factor=None):
    '''
    log|pFq| and its sign for many spectra at once.

    Parameters
    ----------
    params : `HypParams`
    x : (N, m) array or `Spectrum`
        one spectrum per row
    beta : int or `AlgebraDim`
    ctrl : `SeriesControl`
    layer_factor : callable, optional
        k -> (sign, log_abs), scalars or length-N arrays, multiplied into
        layer k; used for the generator-derivative series

    Returns
    -------
    log_abs, sign : `~numpy.ndarray`
    report : `ConvergenceReport`
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    beta = AlgebraDim.coerce(beta)
    arr = _as_array(x)
    if layer_factor is None:
        _check_region(params, arr)
    count, m = arr.shape
    params.check(m, beta, ctrl.max_degree)
    layers = JackLayers(arr, beta)

    def layer_fn(k):
        signs, logs = _coefficient_logs(params.upper, params.lower, int(beta), m, k)
        log_abs, sign = _layer_log(signs, logs, layers.scaled(k), k * layers.log_scale)
        if layer_factor is not None:
            f_sign, f_log = layer_factor(k)
            log_abs = log_abs + f_log
            sign = sign * f_sign
        return log_abs, sign

    label = f"{params.p}F{params.q}"
    return _sum_layers(layer_fn, count, ctrl, label)


def _result(log_abs, sign, report, log_prefactor=0.0):
    log_abs = float(log_abs) + log_prefactor
    sign = float(sign)
    with np.errstate(over='ignore'):
        value = sign * float(np.exp(log_abs)) if sign else 0.0
    return SeriesResult(value, log_abs, sign, report)


def hyp_pFq(params, x, beta, ctrl=None, table=None):
    '''
    Hypergeometric function of one matrix argument, given by its spectrum.

    Parameters
    ----------
    params : `HypParams`
    x : `Spectrum` or array-like
    beta : int or `AlgebraDim`
    ctrl : `SeriesControl`, optional
    table : `JackTable`, optional
        precomputed Jack values for `x`; layers beyond the table are
        computed on demand

    Returns
    -------
    out : `SeriesResult`
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    beta = AlgebraDim.coerce(beta)
    if table is not None:
        x = table.spectrum
    x = x if isinstance(x, Spectrum) else Spectrum(x)
    _check_region(params, x.values)
    params.check(x.m, beta, ctrl.max_degree)
    layers = _layers_for(x, beta, table)

    def layer_fn(k):
        signs, logs = _coefficient_logs(params.upper, params.lower, int(beta), x.m, k)
        return _layer_log(signs, logs, layers.scaled(k), k * layers.log_scale)

    log_abs, sign, report = _sum_layers(layer_fn, 1, ctrl, f"{params.p}F{params.q}")
    return _result(log_abs[0], sign[0], report)


def hyp_pFq_two(params, x, y, beta, ctrl=None):
    '''
    Hypergeometric function of two matrix arguments,

        sum_k sum_kappa coef_kappa C_kappa(X) C_kappa(Y) / (C_kappa(I) k!)

    For 0F0 both arguments are first shifted to have smallest eigenvalue
    zero, 0F0(X + aI, Y + bI) = etr(aY + bX) 0F0(X, Y) up to the cross term,
    so every term of the remaining series is nonnegative.

    Returns
    -------
    out : `SeriesResult`
    '''
    ctrl = SeriesControl() if ctrl is None else ctrl
    beta = AlgebraDim.coerce(beta)
    x = x if isinstance(x, Spectrum) else Spectrum(x)
    y = y if isinstance(y, Spectrum) else Spectrum(y)
    if x.m != y.m:
        raise DimensionError(f"Spectra differ in length: {x.m} and {y.m}")
    m = x.m

    log_prefactor = 0.0
    if params.p == 0 and params.q == 0:
        xv, yv = x.values, y.values
        a, b = float(xv[-1]), float(yv[-1])
        log_prefactor = a * float(np.sum(yv)) + b * float(np.sum(xv)) - m * (a * b)
        x, y = Spectrum(xv - a), Spectrum(yv - b)
    else:
        _check_region(params, x.values * np.max(np.abs(y.values), initial=0.0))
    params.check(m, beta, ctrl.max_degree)

    layers_x = JackLayers(x, beta)
    layers_y = JackLayers(y, beta)
    log_scale = layers_x.log_scale + layers_y.log_scale

    def layer_fn(k):
        signs, logs = _coefficient_logs(params.upper, params.lower, int(beta), m, k)
        logs = logs - _identity_logs(m, int(beta), k)
        scaled = layers_x.scaled(k) * layers_y.scaled(k)
        return _layer_log(signs, logs, scaled, k * log_scale)

    label = f"two-argument {params.p}F{params.q}"
    log_abs, sign, report = _sum_layers(layer_fn, 1, ctrl, label)
    return _result(log_abs[0], sign[0], report, log_prefactor)


def hyp1f1_log(a, c, x, beta, ctrl=None, table=None):
    '''
    1F1(a; c; X). When no eigenvalue of X is positive, Kummer's relation
    1F1(a; c; X) = etr(X) 1F1(c - a; c; -X) is used instead, which turns an
    alternating series into one with nonnegative terms whenever c - a > 0.

    Returns
    -------
    out : `SeriesResult`
    '''
    x = table.spectrum if table is not None else x
    x = x if isinstance(x, Spectrum) else Spectrum(x)
    values = x.values
    if values.size and np.all(values <= 0) and np.any(values < 0):
        res = hyp_pFq(HypParams([c - a], [c]), Spectrum(-values), beta, ctrl)
        res.report.note("evaluated through Kummer's relation")
        return _result(res.log_abs, res.sign, res.report, float(np.sum(values)))
    return hyp_pFq(HypParams([a], [c]), x, beta, ctrl, table=table)
