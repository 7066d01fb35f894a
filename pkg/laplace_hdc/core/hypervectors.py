#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.hypervectors
=============================

Base hypervectors ``v_1 .. v_m`` in ``{-1, +1}^N`` whose expected pairwise
similarity ``v_i^T v_j / N`` equals ``K(i, j)``.

Each hypervector is the sign of a Gaussian projection of a column of the
PSD factor of ``W = sin(pi/2 K)``. By Grothendieck's identity the signs of two
such projections agree with probability determined by ``arcsin`` of the inner
product of the columns, which undoes the sine transform.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from numpy import empty, int8, where

from laplace_hdc.core.numerics import (GAUSSIAN_BLOCK_ROWS, factor_from_eigen, gaussian_block,
                                       gaussian_block_count, sym_eigen)
from laplace_hdc.core.utils import require_positive

_logger = getLogger(__name__)

TRUNCATION_TOLERANCE = 1e-8


class HypervectorSet(namedtuple('HypervectorSet', 'V N kernel seed truncated')):
    """Base hypervectors, one per alphabet value

    :param V: ``N`` x ``m`` matrix of int8 signs; column ``a - 1`` is the hypervector of value ``a``
    :param N: hyperdimension
    :param kernel: :class:`.kernel.KernelSpec` the set was drawn for, ``None`` for user affinities
    :param seed: seed of the Gaussian matrix
    :param truncated: whether negative eigenvalues of ``W`` had to be zeroed
    """

    @property
    def m(self):
        return self.V.shape[1]

    def bits(self):
        """Hypervectors as an ``m`` x ``N`` boolean array, ``True`` standing for ``-1``"""
        return (self.V.T < 0)


def _sign_block(block, N, m, seed, factor, out):
    g = gaussian_block(block, N, m, seed)
    start = block * GAUSSIAN_BLOCK_ROWS
    out[start:start + g.shape[0]] = where(g @ factor >= 0, 1, -1)


def generate_hypervectors(km, N, seed, workers=1):
    """Draw ``V = sign(G F)`` for a kernel matrix

    ``G`` is the ``N`` x ``m`` Gaussian matrix of ``seed`` and ``F`` the PSD factor
    of ``km.W``; ``sign(0)`` is ``+1``. Row blocks of ``V`` are independent, so
    ``workers`` only changes the schedule, never the result.

    :param km: :class:`.kernel.KernelMatrix`
    :param N: hyperdimension
    :param seed: 64-bit seed
    :param workers: number of threads generating row blocks
    :rtype: HypervectorSet
    """
    N = require_positive('N', N)
    decomposition = sym_eigen(km.W)
    truncated = decomposition.min_eigenvalue < -TRUNCATION_TOLERANCE
    if truncated:
        _logger.warning(f'sine transform of the kernel is not positive semi-definite (min eigenvalue '
                        f'{decomposition.min_eigenvalue:.3e}): negative modes are zeroed and the '
                        'hypervectors will not reproduce the kernel as their covariance')
    factor = factor_from_eigen(decomposition)
    m = km.W.shape[0]
    V = empty((N, m), dtype=int8)
    blocks = range(gaussian_block_count(N))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: _sign_block(b, N, m, seed, factor, V), blocks))
    else:
        for b in blocks:
            _sign_block(b, N, m, seed, factor, V)
    V.flags.writeable = False
    _logger.debug(f'generated {m} hypervectors of dimension {N} (seed {seed})')
    return HypervectorSet(V, N, km.spec, seed, truncated)
