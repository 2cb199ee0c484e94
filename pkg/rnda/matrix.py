import logging

import numpy as np

from .errors import DimensionError, DomainError, UnsupportedAlgebraError
from .jack import Spectrum
from .special import AlgebraDim

"""
Matrices over R, C and H stored as beta real component planes, with shape
(beta, rows, cols). Products follow the multiplication table of the unit
basis; eigenvalues, inverses and square roots go through the complex
embedding

    R: A            C: A0 + i A1            H: [[Z, W], [-conj(W), conj(Z)]]

with Z = A0 + i A1 and W = A2 + i A3, a quaternion being z + w j.

Octonion matrices are only handled in "real form", i.e. with every
non-real plane zero, where all the linear algebra is that of the real part.
"""

__all__ = ['AlgebraMatrix', 'HermitianMatrix', 'embed', 'unembed',
           'spectrum_of', 'product_spectrum', 'trace_product',
           'random_positive_definite']

# e_a e_b = _SIGN[a, b] e_{_INDEX[a, b]} for 1, i, j, k
_INDEX = np.array([[0, 1, 2, 3],
                   [1, 0, 3, 2],
                   [2, 3, 0, 1],
                   [3, 2, 1, 0]])
_SIGN = np.array([[1, 1, 1, 1],
                  [1, -1, 1, -1],
                  [1, -1, -1, 1],
                  [1, 1, -1, -1]])


def embed(planes, beta):
    '''
    Complex (or real, for beta = 1) matrix of the planes. Leading batch
    axes are kept; the plane axis is the third from the end.
    '''
    beta = int(beta)
    planes = np.asarray(planes, dtype=np.float64)
    if beta == 1:
        return planes[..., 0, :, :]
    if beta == 2:
        return planes[..., 0, :, :] + 1j * planes[..., 1, :, :]
    if beta == 4:
        z = planes[..., 0, :, :] + 1j * planes[..., 1, :, :]
        w = planes[..., 2, :, :] + 1j * planes[..., 3, :, :]
        top = np.concatenate([z, w], axis=-1)
        bottom = np.concatenate([-w.conj(), z.conj()], axis=-1)
        return np.concatenate([top, bottom], axis=-2)
    raise UnsupportedAlgebraError("no associative matrix embedding for octonions")


def unembed(matrix, beta):
    '''Planes back from the output of `embed`'''
    beta = int(beta)
    matrix = np.asarray(matrix)
    if beta == 1:
        return np.real(matrix)[..., None, :, :].copy()
    if beta == 2:
        return np.stack([matrix.real, matrix.imag], axis=-3)
    if beta == 4:
        r, c = matrix.shape[-2] // 2, matrix.shape[-1] // 2
        z = matrix[..., :r, :c]
        w = matrix[..., :r, c:]
        return np.stack([z.real, z.imag, w.real, w.imag], axis=-3)
    raise UnsupportedAlgebraError("no associative matrix embedding for octonions")


def pair_average(values):
    '''Collapse the doubled eigenvalues of a quaternion embedding'''
    values = np.asarray(values)
    return values.reshape(values.shape[:-1] + (-1, 2)).mean(axis=-1)


class AlgebraMatrix:
    '''
    A rows x cols matrix over the algebra of real dimension beta.

    Parameters
    ----------
    planes : array-like
        shape (beta, rows, cols); plane a holds the coefficients of the
        a-th unit (1, i, j, k)
    beta : int or `AlgebraDim`
    '''

    def __init__(self, planes, beta):
        self._logger = logging.getLogger(__name__)
        self.beta = AlgebraDim.coerce(beta)
        planes = np.array(planes, dtype=np.float64, copy=True)
        if planes.ndim == 2:
            planes = planes[None, :, :]
        if planes.ndim != 3 or planes.shape[0] != int(self.beta):
            raise DimensionError(
                f"Expected {int(self.beta)} planes of a 2-d matrix; got shape {planes.shape}")
        if not np.all(np.isfinite(planes)):
            raise DomainError("Matrix entries must be finite")
        self._planes = planes

    @classmethod
    def from_real(cls, matrix, beta, **kwargs):
        matrix = np.asarray(matrix, dtype=np.float64)
        planes = np.zeros((int(beta),) + matrix.shape)
        planes[0] = matrix
        return cls(planes, beta, **kwargs)

    @classmethod
    def from_complex(cls, matrix, beta, **kwargs):
        return cls(unembed(matrix, beta), beta, **kwargs)

    @property
    def planes(self):
        return self._planes.copy()

    @property
    def shape(self):
        return self._planes.shape[1:]

    @property
    def is_real_form(self):
        '''all non-real planes vanish'''
        return not np.any(self._planes[1:])

    def to_complex(self):
        '''The complex embedding; octonion matrices must be in real form'''
        if int(self.beta) == 8:
            if not self.is_real_form:
                raise UnsupportedAlgebraError(
                    "octonion matrices with non-real entries need a non-associative eigensolver")
            return self._planes[0]
        return embed(self._planes, self.beta)

    def conj_transpose(self):
        planes = np.swapaxes(self._planes, -1, -2).copy()
        planes[1:] *= -1
        return AlgebraMatrix(planes, self.beta)

    def __matmul__(self, other):
        if not isinstance(other, AlgebraMatrix):
            return NotImplemented
        if int(other.beta) != int(self.beta):
            raise DimensionError("Cannot multiply matrices over different algebras")
        if self.shape[1] != other.shape[0]:
            raise DimensionError(f"Shapes {self.shape} and {other.shape} do not conform")
        b = int(self.beta)
        if b == 8:
            if not (self.is_real_form and other.is_real_form):
                raise UnsupportedAlgebraError("octonion products are only supported in real form")
            return AlgebraMatrix.from_real(self._planes[0] @ other._planes[0], b)
        out = np.zeros((b, self.shape[0], other.shape[1]))
        for a in range(b):
            for c in range(b):
                out[_INDEX[a, c]] += _SIGN[a, c] * (self._planes[a] @ other._planes[c])
        return AlgebraMatrix(out, b)

    def copy(self):
        return self.__class__(self._planes, self.beta)

    def __repr__(self):
        return (f"<{self.__class__.__name__}(shape={self.shape}, "
                f"beta={int(self.beta)})>")

    def info(self):
        log = self._logger.info
        log('%s', repr(self))
        log('algebra: %s, real form: %s', self.beta.name.lower(), self.is_real_form)


class HermitianMatrix(AlgebraMatrix):
    '''
    A self-adjoint m x m matrix: plane 0 symmetric, the other planes
    antisymmetric. The upper triangle is reflected on construction, so the
    stored matrix is exactly self-adjoint.

    Parameters
    ----------
    planes : array-like
    beta : int or `AlgebraDim`
    atol : float
        how far from self-adjoint the input may be
    logdet : float, optional
        log-determinant to report instead of the one of the spectrum; used
        for octonion inputs given only through their spectrum
    '''

    def __init__(self, planes, beta, atol=1e-10, logdet=None):
        super().__init__(planes, beta)
        r, c = self.shape
        if r != c:
            raise DimensionError(f"Hermitian matrices must be square; got {self.shape}")
        planes = self._planes
        err = np.max(np.abs(planes[0] - planes[0].T), initial=0.0)
        if len(planes) > 1:
            err = max(err, np.max(np.abs(planes[1:] + np.swapaxes(planes[1:], -1, -2))))
        if err > atol:
            raise DomainError(f"Matrix is not self-adjoint (deviation {err:.3g})")
        self._planes = _reflect(planes)
        self._logdet = logdet
        self._spectrum = None

    @classmethod
    def identity(cls, m, beta):
        return cls.from_real(np.eye(m), beta)

    @classmethod
    def zeros(cls, m, beta):
        return cls.from_real(np.zeros((m, m)), beta)

    @classmethod
    def from_spectrum(cls, values, beta, logdet=None):
        '''The diagonal matrix with the given eigenvalues'''
        return cls.from_real(np.diag(np.asarray(values, dtype=np.float64)), beta,
                             logdet=logdet)

    @property
    def m(self):
        return self.shape[0]

    def copy(self):
        return self.__class__(self._planes, self.beta, logdet=self._logdet)

    def spectrum(self):
        if self._spectrum is None:
            values = np.linalg.eigvalsh(self.to_complex())
            if int(self.beta) == 4:
                values = pair_average(values)
            self._spectrum = Spectrum(values)
        return self._spectrum

    def trace(self):
        return float(np.trace(self._planes[0]))

    def is_positive_definite(self):
        return bool(self.spectrum().values[-1] > 0)

    def logdet(self):
        if self._logdet is not None:
            return float(self._logdet)
        values = self.spectrum().values
        if values[-1] <= 0:
            raise DomainError("Matrix is not positive definite")
        return float(np.sum(np.log(values)))

    def _apply(self, func):
        '''f(A) through the eigendecomposition of the embedding'''
        vals, vecs = np.linalg.eigh(self.to_complex())
        out = (vecs * func(vals)) @ vecs.conj().T
        if int(self.beta) == 8:
            return HermitianMatrix.from_real(np.real(out), 8, atol=np.inf)
        return HermitianMatrix(unembed(out, self.beta), self.beta, atol=np.inf)

    def inverse(self):
        if np.any(self.spectrum().values == 0):
            raise DomainError("Matrix is singular")
        logdet = None if self._logdet is None else -float(self._logdet)
        inv = self._apply(lambda v: 1.0 / v)
        inv._logdet = logdet
        return inv

    def sqrt(self):
        '''The positive semidefinite square root'''
        if self.spectrum().values[-1] < 0:
            raise DomainError("Square root needs a positive semidefinite matrix")
        return self._apply(lambda v: np.sqrt(np.clip(v, 0.0, None)))

    def scaled(self, c):
        logdet = None if self._logdet is None else self._logdet + self.m * np.log(c)
        return HermitianMatrix(c * self._planes, self.beta, logdet=logdet)

    def congruence(self, other):
        '''other self other, for Hermitian `other`'''
        return _hermitian(other @ self @ other)

    def __repr__(self):
        return f"<HermitianMatrix(m={self.m}, beta={int(self.beta)})>"


def _reflect(planes):
    out = np.empty_like(planes)
    upper = np.triu(planes[0])
    out[0] = upper + np.triu(planes[0], 1).T
    for a in range(1, planes.shape[0]):
        strict = np.triu(planes[a], 1)
        out[a] = strict - strict.T
    return out


def _hermitian(matrix):
    return HermitianMatrix(matrix._planes, matrix.beta, atol=np.inf)


def spectrum_of(S):
    '''
    Eigenvalues of a Hermitian matrix in decreasing order. Quaternion
    matrices go through the 2m x 2m complex embedding, whose eigenvalues
    come in pairs.
    '''
    return S.spectrum()


def product_spectrum(A, B):
    '''
    Eigenvalues of A B for positive semidefinite A and B, computed as the
    eigenvalues of B^(1/2) A B^(1/2).
    '''
    if A.m != B.m:
        raise DimensionError(f"Matrices differ in size: {A.m} and {B.m}")
    return A.congruence(B.sqrt()).spectrum()


def trace_product(A, B):
    '''Real trace of A B'''
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"Shapes {A.shape} and {B.shape} do not conform")
    prod = A @ B
    return float(np.trace(prod._planes[0]))


def random_positive_definite(m, beta, rng, floor=0.5):
    '''
    A random Hermitian matrix X* X / m + floor I, positive definite with
    smallest eigenvalue at least `floor`.
    '''
    b = int(beta)
    x = AlgebraMatrix(rng.standard_normal((b, m, m)), b)
    planes = (x.conj_transpose() @ x).planes / m
    planes[0] += floor * np.eye(m)
    return HermitianMatrix(planes, b, atol=np.inf)
