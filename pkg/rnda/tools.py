import json
import logging
from functools import wraps
from time import time

import numpy as np

from .errors import DomainError, ValidationError
from .matrix import AlgebraMatrix, HermitianMatrix
from .settings import MATRIX_FILE_ATOL, SCHEMA_VERSION
from .special import AlgebraDim

"""
An assortment of helpers used by the command line and the samplers:
timing, progress bars and reading/writing the JSON documents.
"""

__all__ = ['timeit', 'progress_bar', 'read_json', 'parse_hermitian',
           'load_hermitian_file', 'load_algebra_matrix_file', 'write_json']

logger = logging.getLogger(__name__)


def timeit(f):
    @wraps(f)
    def timed(*args, **kwds):
        t0 = time()
        res = f(*args, **kwds)
        logger.debug('%s took %.3f s', f.__name__, time() - t0)
        return res
    return timed


def is_notebook():
    """
    Are we in a jupyter notebook?
    """
    try:
        shell = get_ipython().__class__.__name__  # noqa: F821
        return shell == 'ZMQInteractiveShell'
    except NameError:
        return False


def progress_bar(*args, **kwargs):
    from tqdm import tqdm, tqdm_notebook
    func = tqdm_notebook if is_notebook() else tqdm
    return func(*args, **kwargs)


def read_json(fname, field='file'):
    '''
    Load a JSON document, turning I/O and syntax problems into
    `ValidationError` naming `field`.
    '''
    try:
        with open(fname) as f:
            return json.load(f)
    except OSError as err:
        raise ValidationError(f"cannot read {fname}: {err.strerror}", field=field)
    except json.JSONDecodeError as err:
        raise ValidationError(f"{fname} is not valid JSON: {err.msg}", field=field)


def _require(doc, key, field):
    if not isinstance(doc, dict) or key not in doc:
        raise ValidationError(f"missing key '{key}'", field=f"{field}.{key}")
    return doc[key]


def _coerce_beta(doc, field, beta=None):
    raw = _require(doc, 'beta', field)
    try:
        doc_beta = AlgebraDim.coerce(raw)
    except DomainError as err:
        raise ValidationError(str(err), field=f"{field}.beta")
    if beta is not None and int(doc_beta) != int(beta):
        raise ValidationError(f"file has beta={int(doc_beta)}, expected {int(beta)}",
                              field=f"{field}.beta")
    return doc_beta


def _planes(doc, beta, field):
    raw = _require(doc, 'planes', field)
    try:
        planes = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError("planes must be a list of numeric matrices",
                              field=f"{field}.planes")
    if planes.ndim != 3:
        raise ValidationError(f"planes must be a list of 2-d arrays; got shape {planes.shape}",
                              field=f"{field}.planes")
    if planes.shape[0] != int(beta):
        raise ValidationError(f"expected {int(beta)} planes for beta={int(beta)};"
                              f" got {planes.shape[0]}", field=f"{field}.planes")
    if not np.all(np.isfinite(planes)):
        raise ValidationError("planes contain non-finite entries", field=f"{field}.planes")
    return planes


def parse_hermitian(doc, beta=None, m=None, field='matrix'):
    '''
    Build a `HermitianMatrix` from a matrix document, either
    {"m", "beta", "planes"} or {"spectrum", "logdet"}; the latter gives the
    diagonal matrix with that spectrum and needs `beta` from the caller.
    '''
    if isinstance(doc, dict) and 'spectrum' in doc:
        if beta is None:
            raise ValidationError("a spectrum document needs --beta", field=f"{field}.spectrum")
        raw_logdet = _require(doc, 'logdet', field)
        try:
            values = np.asarray(doc['spectrum'], dtype=np.float64)
            logdet = float(raw_logdet)
        except (TypeError, ValueError):
            raise ValidationError("spectrum and logdet must be numeric", field=f"{field}.spectrum")
        if values.ndim != 1 or values.size == 0 or not np.all(np.isfinite(values)):
            raise ValidationError("spectrum must be a non-empty list of finite reals",
                                  field=f"{field}.spectrum")
        if m is not None and values.size != m:
            raise ValidationError(f"expected {m} eigenvalues; got {values.size}",
                                  field=f"{field}.spectrum")
        if np.all(values > 0):
            expected = float(np.sum(np.log(values)))
            if abs(expected - logdet) > 1e-8 * max(1.0, abs(expected)):
                raise ValidationError(f"logdet {logdet:g} does not match the spectrum"
                                      f" ({expected:g})", field=f"{field}.logdet")
        return HermitianMatrix.from_spectrum(values, beta, logdet=logdet)

    doc_beta = _coerce_beta(doc, field, beta)
    size = _require(doc, 'm', field)
    if not isinstance(size, int) or size < 1:
        raise ValidationError(f"m must be a positive integer; got {size!r}", field=f"{field}.m")
    if m is not None and size != m:
        raise ValidationError(f"expected m={m}; got {size}", field=f"{field}.m")
    planes = _planes(doc, doc_beta, field)
    if planes.shape[1:] != (size, size):
        raise ValidationError(f"planes must be {size} x {size}; got {planes.shape[1:]}",
                              field=f"{field}.planes")
    for a, plane in enumerate(planes):
        target = plane.T if a == 0 else -plane.T
        err = float(np.max(np.abs(plane - target)))
        if err > MATRIX_FILE_ATOL:
            kind = 'symmetric' if a == 0 else 'antisymmetric'
            raise ValidationError(f"plane {a} is not {kind} (deviation {err:.3g})",
                                  field=f"{field}.planes[{a}]")
    return HermitianMatrix(planes, doc_beta, atol=MATRIX_FILE_ATOL)


def load_hermitian_file(fname, beta=None, m=None, field='matrix'):
    return parse_hermitian(read_json(fname, field=field), beta=beta, m=m, field=field)


def load_algebra_matrix_file(fname, beta=None, field='matrix'):
    '''A rectangular {"beta", "planes"} document as an `AlgebraMatrix`'''
    doc = read_json(fname, field=field)
    doc_beta = _coerce_beta(doc, field, beta)
    return AlgebraMatrix(_planes(doc, doc_beta, field), doc_beta)


def write_json(doc, stream):
    '''
    Dump `doc` with the schema version added and keys sorted, so equal
    results give byte-identical output.
    '''
    doc = dict(doc, schema_version=SCHEMA_VERSION)
    json.dump(doc, stream, sort_keys=True, indent=2)
    stream.write('\n')
