#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.kernel
=======================

The admissible affinity kernel ``K_alpha`` over an alphabet ``{1..m}``, its
sine transform ``W = sin(pi/2 K)`` and the data-driven bandwidth rule.

A kernel is admissible when ``K`` has a unit diagonal and ``W`` is positive
semi-definite; only then can sign-of-Gaussian hypervectors reproduce ``K`` as
their covariance.
"""

from collections import namedtuple
from logging import getLogger
from numpy import abs, arange, arcsin, asarray, exp, fill_diagonal, median, pi, sin, vstack
from numpy.random import default_rng
from scipy.spatial.distance import cdist

from laplace_hdc.core.exceptions import DegenerateDataError, KernelConfigError
from laplace_hdc.core.numerics import sym_eigen

_logger = getLogger(__name__)

EXPONENT_CONVENTIONS = ('lambda_squared', 'lambda')


class KernelSpec(namedtuple('KernelSpec', 'alpha lam m exponent_convention')):
    """Parameters of the ``K_alpha`` family

    :param alpha: smoothness exponent in (0, 1]
    :param lam: bandwidth, strictly positive
    :param m: alphabet size
    :param exponent_convention: ``lambda_squared`` (default) scales the exponent by
        ``lam**2`` so that ``K`` approximates ``exp(-lam |i-j|^alpha)``; ``lambda``
        uses ``lam`` literally
    """

    def __new__(cls, alpha, lam, m, exponent_convention='lambda_squared'):
        if not 0 < alpha <= 1:
            raise KernelConfigError(f'alpha must lie in (0, 1], got {alpha}')
        if not lam > 0:
            raise KernelConfigError(f'lambda must be positive, got {lam}')
        if int(m) != m or m < 1:
            raise KernelConfigError(f'alphabet size m must be a positive integer, got {m}')
        if exponent_convention not in EXPONENT_CONVENTIONS:
            raise KernelConfigError(f'unknown exponent convention "{exponent_convention}", '
                                    f'expected one of {EXPONENT_CONVENTIONS}')
        return super().__new__(cls, float(alpha), float(lam), int(m), exponent_convention)

    def asdict(self):
        return dict(self._asdict())


class KernelMatrix(namedtuple('KernelMatrix', 'K W spec')):
    """An affinity matrix together with its entrywise sine transform

    ``spec`` is ``None`` for affinities that were not built from the ``K_alpha`` family.
    """

    @classmethod
    def from_affinity(cls, K, spec=None):
        K = asarray(K, dtype=float)
        return cls(K, sin(pi / 2 * K), spec)

    @property
    def m(self):
        return self.K.shape[0]


def _distance_grid(m):
    idx = arange(m)
    return abs(idx[:, None] - idx[None, :]).astype(float)


def build_kernel(spec):
    """Build ``K(i, j) = 2/pi arcsin(exp(-pi^2/8 lam^2 |i-j|^(2 alpha)))``

    >>> km = build_kernel(KernelSpec(alpha=1, lam=0.05, m=8))
    >>> float(km.K[0, 0])
    1.0
    >>> round(float(km.K[0, 1]), 4)
    0.95

    :param spec: a :class:`KernelSpec`
    :rtype: KernelMatrix
    """
    scale = spec.lam ** 2 if spec.exponent_convention == 'lambda_squared' else spec.lam
    w = exp(-(pi ** 2 / 8) * scale * _distance_grid(spec.m) ** (2 * spec.alpha))
    K = (2 / pi) * arcsin(w)
    fill_diagonal(K, 1.0)
    return KernelMatrix(K, sin(pi / 2 * K), spec)


def kernel_from_exponent(beta, lam, m):
    """Affinity whose sine transform is ``exp(-lam |i-j|^beta)``

    With ``beta <= 2`` the transform is positive semi-definite; above 2 it is not.
    """
    w = exp(-lam * _distance_grid(m) ** beta)
    K = (2 / pi) * arcsin(w)
    fill_diagonal(K, 1.0)
    return KernelMatrix(K, w, None)


def check_admissible(km, tol=1e-8):
    """Whether ``km`` has a unit diagonal and a PSD sine transform

    :return: ``(is_admissible, min_eigenvalue)``
    """
    unit_diagonal = bool((abs(km.K.diagonal() - 1.0) <= 1e-12).all())
    min_eigenvalue = sym_eigen(km.W).min_eigenvalue
    return unit_diagonal and min_eigenvalue >= -tol, min_eigenvalue


def alpha_distance(x, y, alpha=1.0):
    """``sum |x_i - y_i|^alpha``, the alpha-th power of the alpha-"norm"

    >>> alpha_distance([0, 0], [4, 4])
    8.0
    >>> alpha_distance([1, 5], [2, 1], alpha=0.5)
    3.0
    """
    diff = abs(asarray(x, dtype=float) - asarray(y, dtype=float))
    return float((diff ** alpha).sum())


def median_distance(vectors, alpha=1.0):
    """Median of ``D(i, j) = ||x_i - x_j||_alpha^alpha`` over all ordered pairs

    The diagonal zeros are included, and an even count of distances takes the
    midpoint of the two central values.

    >>> median_distance([[0, 0], [4, 4]])
    4.0
    """
    x = asarray(vectors, dtype=float)
    if alpha == 1:
        d = cdist(x, x, metric='cityblock')
    else:
        d = vstack([(abs(x - row) ** alpha).sum(axis=1) for row in x])
    return float(median(d))


def bandwidth_from_data(samples, alpha=1.0, c=1.0, sample_count=1000, seed=0):
    """Bandwidth ``lam = c / median(D)`` estimated on a random subset of the data

    :param samples: feature vectors, one per row
    :param alpha: distance exponent
    :param c: bandwidth constant (4 suits the binary SGD classifier)
    :param sample_count: number of vectors drawn uniformly with replacement;
        ``None`` uses every vector once
    :param seed: seed of the subset draw
    """
    x = asarray(samples)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DegenerateDataError('bandwidth estimation needs a non-empty list of feature vectors')
    if sample_count is not None:
        rng = default_rng(seed)
        x = x[rng.integers(0, x.shape[0], size=sample_count)]
    med = median_distance(x, alpha)
    if med == 0:
        raise DegenerateDataError('median pairwise distance is zero: sampled feature vectors are identical')
    lam = c / med
    _logger.info(f'bandwidth: median distance {med:.6g} over {x.shape[0]} vectors, lambda = {lam:.6g}')
    return lam
