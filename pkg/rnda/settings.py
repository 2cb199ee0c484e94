import os

"""
Package-wide constants. Everything else is configured through keyword
defaults on the functions themselves.
"""

# bumped whenever a JSON document written by the CLI changes shape
SCHEMA_VERSION = 1

# series truncation defaults
DEFAULT_MAX_DEGREE = 40
DEFAULT_REL_TOL = 1e-12

# self-adjointness tolerance when reading matrix files
MATRIX_FILE_ATOL = 1e-12

# Monte Carlo: samples are drawn in fixed-size chunks, each chunk with its
# own RNG substream, so the chunk layout (not the thread count) decides
# the numbers
CHUNK_SIZE = 4096
MIN_MC_COUNT = 10_000

# worker cap for the chunked samplers
THREADS_ENV = 'RNDA_THREADS'

# default level of the package logger
LOG_LEVEL_ENV = 'RNDA_LOG_LEVEL'

# verification budgets: how many random points, how many Monte Carlo
# samples and how deep the series go for each suite
budgets = {
    'fast': {
        'jack_spectra': 3,
        'jack_max_weight': 6,
        'random_points': 10,
        'grid_points': 10,
        'mc_count': 20_000,
        'lmax_max_degree': 150,
        'quad_check': False,
    },
    'full': {
        'jack_spectra': 20,
        'jack_max_weight': 8,
        'random_points': 100,
        'grid_points': 50,
        'mc_count': 200_000,
        'lmax_max_degree': 150,
        'quad_check': True,
    },
}


def threads_from_env(default=None):
    '''
    Worker count for the samplers, read from the `RNDA_THREADS` environment
    variable. Falls back to `default`, or to min(4, cpu count).
    '''
    if default is None:
        default = min(4, os.cpu_count() or 1)
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return default
    try:
        threads = int(value)
    except ValueError:
        return default
    return max(1, threads)
