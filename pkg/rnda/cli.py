import argparse
import logging
import sys

import numpy as np

from .errors import ConvergenceError, RndaError, ValidationError
from .generators import GENERATORS, get_generator
from .hypergeom import SeriesControl
from .log import get_logger
from .matrix import HermitianMatrix
from .sampling import mc_lambda_max_cdf, sample_wishart_spectra
from .settings import DEFAULT_MAX_DEGREE, DEFAULT_REL_TOL
from .tools import load_algebra_matrix_file, load_hermitian_file, timeit, write_json
from .verify import SUITES, run_suites
from .wishart import (WishartParams, gw_density_log, inv_gw_density_log,
                      lambda_max_cdf_central, wishart_density_log)

"""
Command line front end:

    rnda density   log-density of a Wishart, generalised or inverse law
    rnda lmax      CDF of the largest eigenvalue, by series or Monte Carlo
    rnda sample    eigenvalues of sampled Wishart matrices, as CSV
    rnda verify    run the verification suites

JSON goes to stdout, logs to stderr. Exit codes: 0 success, 1 failed
verification, 2 invalid input, 3 series did not converge.
"""

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3


# -------------------------------------------------------------------------
# argument helpers


def _ctrl(args):
    return SeriesControl(max_degree=args.max_degree, rel_tol=args.tol)


def _optional_matrix(path, beta, m, field):
    if path is None:
        return None
    return load_hermitian_file(path, beta=beta, m=m, field=field)


def _load_inputs(args, m=None):
    '''
    sigma (identity when not given), the mean and theta files, with the
    dimension taken from the first of S, sigma, mu and --m that fixes it.
    '''
    m = args.m if m is None else m
    sigma = _optional_matrix(args.sigma, args.beta, m, 'sigma')
    mu = None
    if getattr(args, 'mu', None) is not None:
        mu = load_algebra_matrix_file(args.mu, beta=args.beta, field='mu')
    if sigma is not None:
        m = sigma.m
    elif mu is not None:
        m = mu.shape[1]
    if m is None:
        raise ValidationError("give --m or a matrix file to fix the dimension", field='m')
    if sigma is None:
        sigma = HermitianMatrix.identity(m, args.beta)
    theta = _optional_matrix(getattr(args, 'theta', None), args.beta, None, 'theta')
    return sigma, mu, theta


def _load_params(args, m=None):
    sigma, mu, theta = _load_inputs(args, m)
    omega = _optional_matrix(getattr(args, 'omega', None), args.beta, sigma.m, 'omega')
    if mu is not None:
        if omega is not None:
            raise ValidationError("give --omega or --mu, not both", field='omega')
        return WishartParams.from_mean(args.n, sigma, mu, theta)
    return WishartParams(args.n, sigma, omega)


def _finite_or_none(value):
    value = float(value)
    return value if np.isfinite(value) else None


def parse_y_range(text):
    '''lo:hi:steps -> evenly spaced grid; needs 0 < lo < hi and steps >= 1'''
    try:
        lo, hi, steps = text.split(':')
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ValidationError(f"expected lo:hi:steps; got '{text}'", field='y-range')
    if steps < 1 or not hi > lo or not lo > 0:
        raise ValidationError(f"empty or non-positive range '{text}'", field='y-range')
    return np.linspace(lo, hi, steps)


def parse_y_grid(text):
    try:
        values = np.array([float(v) for v in text.split(',') if v.strip()])
    except ValueError:
        raise ValidationError(f"expected a comma separated list; got '{text}'", field='y-grid')
    if values.size == 0 or not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ValidationError("y values must be positive and finite", field='y-grid')
    return values


# -------------------------------------------------------------------------
# commands


@timeit
def cmd_density(args, out):
    field = 'w' if args.dist == 'inv-gw' else 's'
    S = load_hermitian_file(args.s, beta=args.beta, m=args.m, field=field)
    params = _load_params(args, S.m)
    if args.verbose:
        S.info()
        params.info()
    ctrl = _ctrl(args)
    if args.dist == 'wishart':
        value = wishart_density_log(S, params, ctrl)
    else:
        h = get_generator(args.generator, args.beta)
        density = gw_density_log if args.dist == 'gw' else inv_gw_density_log
        value = density(S, params, h, ctrl)
    write_json({
        'dist': args.dist,
        'log_density': _finite_or_none(value),
        'convergence': ctrl.diagnostics.to_dict(),
    }, out)
    return EXIT_OK


@timeit
def cmd_lmax(args, out):
    if args.y_grid is not None:
        y = parse_y_grid(args.y_grid)
    elif args.y_range is not None:
        y = parse_y_range(args.y_range)
    else:
        raise ValidationError("give --y-grid or --y-range", field='y-grid')
    params = _load_params(args)
    if args.verbose:
        params.info()

    if args.method == 'series':
        if not params.is_central:
            raise ValidationError("the series method needs a central law;"
                                  " use --method mc for noncentral input", field='method')
        points, reports = [], []
        for yi in y:
            ctrl = _ctrl(args)
            points.append({'y': float(yi), 'cdf': lambda_max_cdf_central(yi, params, ctrl)})
            reports.append(ctrl.diagnostics.to_dict())
        doc = {'method': 'series', 'points': points, 'convergence': reports}
    else:
        est = mc_lambda_max_cdf(params, y, args.count, args.seed)
        points = [{'y': float(yi), 'cdf': float(c), 'stderr': float(se)}
                  for yi, c, se in zip(est.y, est.cdf, est.stderr)]
        doc = {'method': 'mc', 'points': points, 'count': est.count, 'seed': args.seed}
    write_json(doc, out)
    return EXIT_OK


@timeit
def cmd_sample(args, out):
    sigma, mu, theta = _load_inputs(args)
    batch = sample_wishart_spectra(args.n, sigma, args.beta, args.count, args.seed,
                                   mu=mu, theta=theta, progress=args.progress)
    batch.to_csv(args.out)
    if args.verbose:
        batch.info()
    logger.info("wrote %d samples to %s", batch.count, args.out)
    return EXIT_OK


@timeit
def cmd_verify(args, out):
    checks = run_suites(args.suite, args.budget)
    passed = all(c.passed for c in checks)
    write_json({
        'suite': args.suite,
        'budget': args.budget,
        'passed': passed,
        'checks': [dict(c._asdict(), measured=(c.measured if np.isfinite(c.measured)
                                               else None)) for c in checks],
    }, out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


# -------------------------------------------------------------------------
# parser


def _add_common(parser, beta_choices=(1, 2, 4, 8)):
    parser.add_argument('--beta', type=int, choices=beta_choices, required=True,
                        help='real dimension of the algebra')
    parser.add_argument('--n', type=float, required=True, help='degrees of freedom')
    parser.add_argument('--m', type=int, default=None,
                        help='dimension, when no matrix file fixes it')
    parser.add_argument('--sigma', metavar='FILE', default=None,
                        help='scale matrix (default: identity)')


def _add_series(parser):
    parser.add_argument('--max-degree', type=int, default=DEFAULT_MAX_DEGREE,
                        help='largest partition weight summed (default: %(default)s)')
    parser.add_argument('--tol', type=float, default=DEFAULT_REL_TOL,
                        help='relative layer tolerance (default: %(default)s)')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='rnda', description='Wishart distributions over R, C, H and O')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('density', help='log-density at a matrix')
    _add_common(p)
    p.add_argument('--s', metavar='FILE', required=True,
                   help='the matrix S (W for --dist inv-gw)')
    p.add_argument('--omega', metavar='FILE', default=None,
                   help='noncentrality (default: central)')
    p.add_argument('--dist', choices=['wishart', 'gw', 'inv-gw'], default='wishart')
    p.add_argument('--generator', choices=sorted(GENERATORS), default='normal')
    _add_series(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser('lmax', help='CDF of the largest eigenvalue')
    _add_common(p)
    p.add_argument('--omega', metavar='FILE', default=None)
    p.add_argument('--mu', metavar='FILE', default=None, help='mean matrix (mc only)')
    p.add_argument('--theta', metavar='FILE', default=None,
                   help='row covariance for --mu (default: identity)')
    grid = p.add_mutually_exclusive_group()
    grid.add_argument('--y-grid', default=None, help='comma separated y values')
    grid.add_argument('--y-range', default=None, help='lo:hi:steps')
    p.add_argument('--method', choices=['series', 'mc'], default='series')
    p.add_argument('--count', type=int, default=100_000)
    p.add_argument('--seed', type=int, default=0)
    _add_series(p)
    p.set_defaults(func=cmd_lmax)

    p = sub.add_parser('sample', help='sample Wishart eigenvalues to CSV')
    _add_common(p)
    p.add_argument('--mu', metavar='FILE', default=None)
    p.add_argument('--theta', metavar='FILE', default=None)
    p.add_argument('--count', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', metavar='PATH', required=True)
    p.add_argument('--progress', action='store_true')
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser('verify', help='run the verification suites')
    p.add_argument('--suite', choices=sorted(SUITES) + ['all'], default='all')
    p.add_argument('--budget', choices=['fast', 'full'], default='fast')
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code
    get_logger(level='DEBUG' if args.verbose else None)

    try:
        return args.func(args, out)
    except ConvergenceError as err:
        logger.error("%s", err)
        write_json({'error': str(err), 'convergence': (
            err.report.to_dict() if err.report is not None else None)}, out)
        return EXIT_NOT_CONVERGED
    except (RndaError, ValueError) as err:
        logger.error("%s", err)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
