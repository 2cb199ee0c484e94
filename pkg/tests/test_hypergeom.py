import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from rnda import hypergeom
from rnda.errors import ConvergenceError, DimensionError, ParameterError
from rnda.hypergeom import (ConvergenceReport, HypParams, SeriesControl, hyp1f1_log,
                            hyp_pFq, hyp_pFq_log_batch, hyp_pFq_two)
from rnda.jack import JackTable, Spectrum

BETAS = [1, 2, 4, 8]


def scalar_series(upper, lower, x, terms=200):
    '''the classical pFq by direct summation'''
    total, term = 0.0, 1.0
    for k in range(terms):
        total += term
        ratio = x / (k + 1)
        for a in upper:
            ratio *= a + k
        for b in lower:
            ratio /= b + k
        term *= ratio
    return total


def test_0f0_is_etr():
    res = hyp_pFq(HypParams(), [0.1, 0.2], 1)
    assert_allclose(res.value, math.exp(0.3), rtol=1e-12)
    assert res.report.converged


def test_1f0_is_determinant_power():
    res = hyp_pFq(HypParams([2.5]), [0.2, 0.1], 2)
    assert_allclose(res.value, (0.8 * 0.9) ** -2.5, rtol=1e-10)


@pytest.mark.parametrize('params', [HypParams(), HypParams([1.5], [2.5]),
                                    HypParams([], [3.0]), HypParams([2.0], [])])
def test_zero_argument(params):
    res = hyp_pFq(params, [0.0, 0.0, 0.0], 1)
    assert res.value == 1.0
    assert res.log_abs == 0.0


@pytest.mark.parametrize('beta', BETAS)
@pytest.mark.parametrize('m', [1, 2, 3, 4])
def test_closed_forms(beta, m):
    rng = np.random.default_rng(7 * beta + m)
    x = rng.uniform(-1.0, 1.0, size=m)
    assert_allclose(hyp_pFq(HypParams(), x, beta).value, math.exp(x.sum()), rtol=1e-10)
    x = rng.uniform(-0.25, 0.25, size=m)
    ctrl = SeriesControl(max_degree=40)
    assert_allclose(hyp_pFq(HypParams([2.5]), x, beta, ctrl).value,
                    np.prod(1.0 - x) ** -2.5, rtol=1e-8)


@pytest.mark.parametrize('x', np.linspace(-1.0, 1.0, 9))
def test_scalar_reduction(x):
    for beta in BETAS:
        assert_allclose(hyp_pFq(HypParams([], [1.75]), [x], beta).value,
                        special.hyp0f1(1.75, x), rtol=1e-10)
        assert_allclose(hyp_pFq(HypParams([0.5], [2.25]), [x], beta).value,
                        special.hyp1f1(0.5, 2.25, x), rtol=1e-10)
        assert_allclose(hyp_pFq(HypParams([1.5, 0.5], [2.5, 3.0]), [x], beta).value,
                        scalar_series([1.5, 0.5], [2.5, 3.0], x), rtol=1e-10)


def test_scalar_value_independent_of_beta():
    values = [hyp_pFq(HypParams([0.7], [1.9]), [0.6], beta).value for beta in BETAS]
    assert_allclose(values, values[0], rtol=1e-14)


def test_two_argument_identity_second_argument():
    x = [0.4, -0.2, 0.1]
    one = hyp_pFq(HypParams([], [3.5]), x, 2)
    two = hyp_pFq_two(HypParams([], [3.5]), x, [1.0, 1.0, 1.0], 2)
    assert_allclose(two.value, one.value, rtol=1e-12)
    two = hyp_pFq_two(HypParams(), x, np.ones(3), 1)
    assert_allclose(two.value, math.exp(0.3), rtol=1e-12)


def test_two_argument_examples():
    assert hyp_pFq_two(HypParams([1.0], [2.0]), [0.0, 0.0], [0.7, 0.1], 1).value == 1.0
    assert_allclose(hyp_pFq_two(HypParams(), [0.3], [0.5], 1).value, math.exp(0.15),
                    rtol=1e-13)


@pytest.mark.parametrize('beta', BETAS)
def test_two_argument_symmetry(beta):
    x, y = [0.9, -0.3, 0.2], [-1.5, -0.4, -0.1]
    for params in (HypParams(), HypParams([], [3.5])):
        a = hyp_pFq_two(params, x, y, beta)
        b = hyp_pFq_two(params, y, x, beta)
        assert a.log_abs == b.log_abs
        assert a.sign == b.sign


@pytest.mark.parametrize('beta', [1, 2, 4])
def test_two_argument_scalar_first_argument(beta):
    c, y = -0.75, np.array([2.0, 1.0, 0.5])
    res = hyp_pFq_two(HypParams(), c * np.ones(3), y, beta)
    assert_allclose(res.log_abs, c * y.sum(), rtol=1e-14)
    assert res.report.degree <= 2


def test_two_argument_dimension_mismatch():
    with pytest.raises(DimensionError):
        hyp_pFq_two(HypParams(), [0.1, 0.2], [0.3], 1)


def test_divergent_region_rejected():
    with pytest.raises(ParameterError):
        hyp_pFq(HypParams([1.0]), [1.0, 0.2], 1)
    with pytest.raises(ParameterError):
        hyp_pFq(HypParams([1.0, 2.0]), [0.1], 1)


def test_vanishing_denominator():
    with pytest.raises(ParameterError):
        hyp_pFq(HypParams([], [-1.0]), [0.5], 1)
    # the second row shifts b = 0.5 onto zero at beta = 1
    with pytest.raises(ParameterError):
        hyp_pFq(HypParams([], [0.5]), [0.5, 0.2], 1)


def test_control_validation():
    with pytest.raises(ParameterError):
        SeriesControl(max_degree=0)
    with pytest.raises(ParameterError):
        SeriesControl(rel_tol=0.0)


def test_convergence_failure_reports():
    ctrl = SeriesControl(max_degree=5)
    with pytest.raises(ConvergenceError) as err:
        hyp_pFq(HypParams(), [30.0, 1.0], 1, ctrl)
    report = err.value.report
    assert not report.converged
    assert report.degree == 5
    assert ctrl.diagnostics is report
    assert 'max_degree' in report.notes[0]


def test_report_serialises():
    ctrl = SeriesControl()
    hyp_pFq(HypParams([], [2.0]), [0.3, 0.1], 2, ctrl)
    doc = ctrl.diagnostics.to_dict()
    assert doc['converged'] is True
    assert len(doc['layer_log10']) == doc['degree'] + 1
    assert len(doc['last_ratios']) == 2
    assert all(r < 1e-12 for r in doc['last_ratios'])
    report = ConvergenceReport(1, [0.0, -np.inf], True)
    assert report.to_dict()['layer_log10'] == [0.0, None]


def test_layers_decay():
    ctrl = SeriesControl()
    hyp_pFq(HypParams([], [1.5]), [2.0, 1.0], 1, ctrl)
    tail = ctrl.diagnostics.layer_log10[-6:]
    assert all(np.isfinite(tail))
    assert all(b < a for a, b in zip(tail, tail[1:]))


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    x = rng.uniform(-2.0, 4.0, size=(6, 3))
    params = HypParams([], [2.5])
    log_abs, sign, report = hyp_pFq_log_batch(params, x, 2)
    assert report.converged
    for row, spectrum in enumerate(x):
        res = hyp_pFq(params, spectrum, 2)
        assert_allclose(log_abs[row], res.log_abs, rtol=1e-12, atol=1e-13)
        assert sign[row] == res.sign


def test_large_batch_cancelling_terms():
    rng = np.random.default_rng(11)
    x = rng.uniform(-2.0, 0.5, size=(100, 2))
    log_abs, sign, report = hyp_pFq_log_batch(HypParams(), x, 1, SeriesControl(max_degree=120))
    assert report.converged
    assert np.all(sign == 1)
    assert_allclose(log_abs, x.sum(axis=1), rtol=0, atol=1e-9)


def test_compensated_sum_keeps_small_terms():
    terms = np.tile([[1e16], [1.0], [-1e16]], (1, 100))
    assert_allclose(hypergeom._compensated_sum(terms), np.ones(100), rtol=0, atol=0)


def test_shared_table():
    x = Spectrum([0.8, 0.3])
    table = JackTable(x, 4, 10)
    params = HypParams([1.5], [2.5])
    direct = hyp_pFq(params, x, 4)
    shared = hyp_pFq(params, None, 4, table=table)
    assert_allclose(shared.log_abs, direct.log_abs, rtol=1e-13)


@pytest.mark.parametrize('x', [-3.0, -0.5, 0.5, 2.0])
def test_hyp1f1_scalar(x):
    res = hyp1f1_log(1.5, 4.0, [x], 2)
    assert_allclose(res.value, special.hyp1f1(1.5, 4.0, x), rtol=1e-10)
    if x < 0:
        assert any('Kummer' in note for note in res.report.notes)


@pytest.mark.parametrize('beta', [1, 2, 4, 8])
def test_hyp1f1_kummer_matches_direct(beta):
    x = [-0.9, -0.4, -0.1]
    kummer = hyp1f1_log(1.5, 3.5, x, beta)
    direct = hyp_pFq(HypParams([1.5], [3.5]), x, beta)
    assert_allclose(kummer.log_abs, direct.log_abs, rtol=1e-10)
