#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.numerics
=========================

Seeded Gaussian sampling and small dense symmetric linear algebra.

Dense matrices are plain two-dimensional :class:`numpy.ndarray` of 64-bit
floats. Symmetric eigenproblems are delegated to LAPACK through
:func:`scipy.linalg.eigh`; this module only normalizes ordering, checks the
inputs and maps solver failures onto :class:`.exceptions.EigenSolverError`.
"""

from collections import namedtuple
from logging import getLogger
from numpy import abs, asarray, clip, eye, intp, iinfo, isfinite, sqrt, vstack
from numpy.random import default_rng
from scipy.linalg import LinAlgError, eigh

from laplace_hdc.core.exceptions import EigenSolverError, SizeOverflowError
from laplace_hdc.core.utils import derive_seed, require_positive

_logger = getLogger(__name__)

# Gaussian matrices are drawn in row blocks, each block from its own derived
# stream, so any block can be generated independently of the others.
GAUSSIAN_BLOCK_ROWS = 4096
MAX_EIGEN_DIMENSION = 4096
SYMMETRY_TOLERANCE = 1e-12
# eigenvalues below this fraction of the spectral radius count as zero
RELATIVE_EIGEN_FLOOR = 1e-12
_MAX_ENTRIES = iinfo(intp).max // 8


class EigenDecomposition(namedtuple('EigenDecomposition', 'eigenvalues eigenvectors')):
    """Spectrum of a symmetric matrix

    :param eigenvalues: real eigenvalues sorted non-increasing
    :param eigenvectors: orthonormal eigenvectors, one per column, in the same order
    """

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues[-1])

    def reconstruct(self):
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def gaussian_block(block, rows, cols, seed):
    """Rows ``block * GAUSSIAN_BLOCK_ROWS`` onwards of :func:`gaussian_matrix`"""
    start = block * GAUSSIAN_BLOCK_ROWS
    count = min(GAUSSIAN_BLOCK_ROWS, rows - start)
    rng = default_rng(derive_seed(seed, block))
    return rng.standard_normal((count, cols))


def gaussian_block_count(rows):
    return (rows + GAUSSIAN_BLOCK_ROWS - 1) // GAUSSIAN_BLOCK_ROWS


def gaussian_matrix(rows, cols, seed):
    """A ``rows`` x ``cols`` matrix of i.i.d. standard normal entries

    The output is a pure function of ``(rows, cols, seed)``.

    :param rows: number of rows (at least 1)
    :param cols: number of columns (at least 1)
    :param seed: 64-bit integer seed
    :rtype: numpy.ndarray
    """
    rows = require_positive('rows', rows)
    cols = require_positive('cols', cols)
    if rows * cols > _MAX_ENTRIES:
        raise SizeOverflowError(f'a {rows} x {cols} Gaussian matrix does not fit into memory')
    return vstack([gaussian_block(b, rows, cols, seed) for b in range(gaussian_block_count(rows))])


def _check_symmetric(a):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigenSolverError(f'eigendecomposition needs a square matrix, got shape {a.shape}')
    if a.shape[0] > MAX_EIGEN_DIMENSION:
        raise EigenSolverError(f'matrix dimension {a.shape[0]} exceeds {MAX_EIGEN_DIMENSION}')
    if not isfinite(a).all():
        raise EigenSolverError('matrix has non-finite entries')
    scale = max(1.0, float(abs(a).max())) if a.size else 1.0
    if a.size and float(abs(a - a.T).max()) > SYMMETRY_TOLERANCE * scale:
        raise EigenSolverError('matrix is not symmetric')


def sym_eigen(a, tol=1e-9):
    """Eigendecomposition of a real symmetric matrix

    >>> from numpy import diag
    >>> e = sym_eigen(diag([1.0, 3.0]))
    >>> e.eigenvalues
    array([3., 1.])

    :param a: symmetric matrix, dimension at most 4096
    :param tol: orthonormality tolerance that the result must satisfy
    :rtype: EigenDecomposition
    """
    a = asarray(a, dtype=float)
    _check_symmetric(a)
    try:
        w, q = eigh(a)
    except LinAlgError as e:
        raise EigenSolverError(f'symmetric eigensolver did not converge: {e}')
    w, q = w[::-1].copy(), q[:, ::-1].copy()
    # full verification is cubic, keep it to the sizes used for kernels
    if a.shape[0] <= 512:
        orthogonality = float(abs(q.T @ q - eye(a.shape[0])).max())
        if orthogonality > max(tol, 1e-9):
            raise EigenSolverError(f'eigenvectors lost orthonormality ({orthogonality:.2e}), '
                                   'the matrix is ill-conditioned')
    return EigenDecomposition(w, q)


def factor_from_eigen(decomposition):
    """The factor ``F = S_+^{1/2} Q^T`` of a decomposition, negative modes zeroed"""
    w = decomposition.eigenvalues
    floor = RELATIVE_EIGEN_FLOOR * float(abs(w).max()) if w.size else 0.0
    kept = clip(w, 0.0, None)
    kept[kept <= floor] = 0.0
    return sqrt(kept)[:, None] * decomposition.eigenvectors.T


def psd_factor(w, tol=1e-8):
    """Square factor ``F`` with ``F^T F`` the PSD projection of ``w``

    Columns of ``F`` play the role of unit vectors whose pairwise inner
    products are the entries of ``w`` whenever ``w`` is PSD with unit
    diagonal.

    :param w: symmetric matrix
    :param tol: eigenvalues above ``-tol`` are treated as round-off
    :rtype: numpy.ndarray
    """
    decomposition = sym_eigen(w)
    if decomposition.min_eigenvalue < -tol:
        _logger.debug(f'psd_factor: zeroing eigenvalues down to {decomposition.min_eigenvalue:.3e}')
    return factor_from_eigen(decomposition)


def psd_projection(w):
    """``F^T F`` for the factor returned by :func:`psd_factor`"""
    f = psd_factor(w)
    return f.T @ f

