import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .errors import DivergentIntegralError, DomainError, ValidationError
from .special import AlgebraDim

"""
Generator functions h of matrix-variate elliptical distributions,

    f(X) = C(m, n) / (|Sigma|^{beta n/2} |Theta|^{beta m/2})
           h(tr[Sigma^-1 (X - mu)* Theta^-1 (X - mu)])

and the constant C(m, n) that makes f integrate to one.
"""

__all__ = ['GeneratorFunction', 'EllipticalConstant', 'normal_generator',
           'elliptical_constant_log', 'GENERATORS', 'register_generator',
           'get_generator']

logger = logging.getLogger(__name__)

# a tail of the log-integrand must sit this far below its peak
_TAIL_DROP = 20.0
_TAIL_REACH = 60.0


class GeneratorFunction:
    '''
    A generator h: [0, inf) -> [0, inf) with its derivatives.

    Parameters
    ----------
    name : str
    func : callable
        h(u), vectorised over numpy arrays
    derivative : callable
        (j, v) -> h^(j)(v)
    log_derivative : callable, optional
        (j, v) -> (sign, log|h^(j)(v)|); without it the log is taken of
        `derivative`, which underflows once h does
    log_constant : callable, optional
        (m, n) -> log C(m, n) in closed form
    beta : int or `AlgebraDim`, optional
        the algebra the closed-form constant belongs to
    '''

    def __init__(self, name, func, derivative, log_derivative=None,
                 log_constant=None, beta=None):
        self.name = name
        self._func = func
        self._derivative = derivative
        self._log_derivative = log_derivative
        self._log_constant = log_constant
        self.beta = None if beta is None else AlgebraDim.coerce(beta)

    def eval(self, u):
        return self._func(u)

    __call__ = eval

    def derivative(self, j, v):
        if j < 0:
            raise DomainError(f"derivative order must be >= 0; got {j}")
        return self._derivative(j, v)

    def log_derivative(self, j, v):
        '''sign and log-magnitude of h^(j)(v)'''
        if self._log_derivative is not None:
            return self._log_derivative(j, v)
        value = np.asarray(self.derivative(j, v), dtype=np.float64)
        with np.errstate(divide='ignore'):
            return np.sign(value), np.log(np.abs(value))

    def log_eval(self, u):
        return self.log_derivative(0, u)[1]

    @property
    def has_log_constant(self):
        return self._log_constant is not None

    def log_constant(self, m, n):
        return self._log_constant(m, n)

    def __repr__(self):
        beta = '' if self.beta is None else f", beta={int(self.beta)}"
        return f"<GeneratorFunction(name='{self.name}'{beta})>"


class EllipticalConstant:
    '''log C(m, n) together with how it was obtained'''

    def __init__(self, log_c, method):
        if not math.isfinite(log_c):
            raise DivergentIntegralError(f"normalising constant is not finite: {log_c}")
        self.log_c = float(log_c)
        self.method = method

    @property
    def value(self):
        return math.exp(self.log_c)

    def __float__(self):
        return self.log_c

    def __repr__(self):
        return f"<EllipticalConstant(log_c={self.log_c:.12g}, method='{self.method}')>"


def normal_generator(beta):
    '''
    h(u) = exp(-beta u / 2), the generator of the matrix-variate normal
    distribution, with C(m, n) = (2 pi / beta)^{-beta m n / 2}.
    '''
    beta = AlgebraDim.coerce(beta)
    b = float(int(beta))

    def func(u):
        return np.exp(-b * np.asarray(u, dtype=np.float64) / 2.0)

    def derivative(j, v):
        return (-b / 2.0) ** j * func(v)

    def log_derivative(j, v):
        return (-1.0) ** j, j * math.log(b / 2.0) - b * np.asarray(v, dtype=np.float64) / 2.0

    def log_constant(m, n):
        return -(b * m * n / 2.0) * math.log(2.0 * math.pi / b)

    return GeneratorFunction('normal', func, derivative, log_derivative,
                             log_constant, beta=beta)


def _radial_log_integral(h, p):
    '''
    log of int_0^inf u^{p-1} h(u^2) du, integrated over s = log(u^2)
    around the peak of the integrand.
    '''
    def psi(s):
        try:
            u = math.exp(s)
        except OverflowError:
            return -math.inf
        with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
            val = 0.5 * p * s + float(h.log_eval(u))
        return val if not math.isnan(val) else -math.inf

    try:
        res = minimize_scalar(lambda s: -psi(s), bracket=(-2.0, 2.0))
    except (ValueError, OverflowError, RuntimeError) as err:
        raise DivergentIntegralError(f"no peak found in the radial integrand of {h.name}: {err}")
    s_peak = float(res.x)
    peak = psi(s_peak)
    if not math.isfinite(peak):
        raise DivergentIntegralError(f"radial integrand of {h.name} has no finite peak")
    for edge in (s_peak - _TAIL_REACH, s_peak + _TAIL_REACH):
        if psi(edge) > peak - _TAIL_DROP:
            raise DivergentIntegralError(
                f"radial integral of {h.name} does not converge for beta*m*n = {p:g}")

    def integrand(s):
        return math.exp(psi(s) - peak)

    left, _ = quad(integrand, -np.inf, s_peak, epsabs=0.0, epsrel=1e-12, limit=200)
    right, _ = quad(integrand, s_peak, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)
    total = left + right
    if not (math.isfinite(total) and total > 0):
        raise DivergentIntegralError(f"radial integral of {h.name} failed: {total}")
    # u^{p-1} du = (1/2) exp(p s / 2) ds
    return peak + math.log(total) - math.log(2.0)


def elliptical_constant_log(h, m, n, beta, method='auto'):
    '''
    log C(m, n) = log Gamma(beta m n / 2) - log 2 - (beta m n / 2) log pi
                  - log int_0^inf u^{beta m n - 1} h(u^2) du

    Parameters
    ----------
    h : `GeneratorFunction`
    m, n : int
    beta : int or `AlgebraDim`
    method : {'auto', 'quad'}
        'auto' uses the generator's closed form when it has one for this
        beta, 'quad' always integrates

    Returns
    -------
    out : `EllipticalConstant`
    '''
    beta = AlgebraDim.coerce(beta)
    if method not in ('auto', 'quad'):
        raise ValidationError(f"unknown method '{method}'", field='method')
    if m < 1 or n < 1:
        raise DomainError(f"need m, n >= 1; got m={m}, n={n}")

    if method == 'auto' and h.has_log_constant and h.beta in (None, beta):
        return EllipticalConstant(h.log_constant(m, n), 'closed-form')

    p = int(beta) * m * n
    log_c = (math.lgamma(p / 2.0) - math.log(2.0) - (p / 2.0) * math.log(math.pi)
             - _radial_log_integral(h, p))
    logger.debug("C(%d, %d) for %s by quadrature: log C = %.12g", m, n, h.name, log_c)
    return EllipticalConstant(log_c, 'quad')


GENERATORS = {'normal': normal_generator}


def register_generator(name, factory, dims=((1, 1),)):
    '''
    Add a generator factory (beta -> `GeneratorFunction`) to `GENERATORS`.

    The factory is checked for every beta: h must be finite and nonnegative
    on a grid, and its radial integral must converge at each (m, n) in
    `dims`.
    '''
    grid = np.linspace(0.0, 50.0, 501)
    for beta in AlgebraDim:
        h = factory(beta)
        values = np.asarray(h.eval(grid), dtype=np.float64)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DomainError(f"generator '{name}' is negative or not finite on [0, 50]")
        for m, n in dims:
            elliptical_constant_log(h, m, n, beta, method='quad')
    GENERATORS[name] = factory
    logger.debug("registered generator '%s'", name)


def get_generator(name, beta):
    try:
        factory = GENERATORS[name]
    except KeyError:
        raise ValidationError(f"unknown generator '{name}'", field='generator')
    return factory(beta)
