#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.permutations
=============================

Trace-orthogonal permutation families used to bind features.

Every family assigns a shift to each feature and applies it as index
arithmetic on a length-``N`` vector, never as an ``N`` x ``N`` matrix:

=============  ======================================  ==========================
kind           layout of the hypervector               shift acts on
=============  ======================================  ==========================
``cyclic1d``   ``N``                                   the whole vector, modulo N
``block1d``    ``d`` x ``M`` with ``N = d M``          the first axis, modulo d
``cyclic2d``   ``M`` x ``M`` with ``N = M^2 >= L^2``   both axes, modulo M
``block2d``    ``L`` x ``L`` x ``M`` with ``N = M L^2``  the first two axes, modulo L
=============  ======================================  ==========================

Feature ``f`` (counted from 0) uses shift ``f`` for the 1D kinds and the pixel
coordinates ``(f // L, f % L)`` for the 2D kinds, so the first feature is
always bound without permutation. Applying the family member of index ``i``
to ``v`` gives ``(P_i v)(k) = v(k + i)``.
"""

from logging import getLogger
from math import isqrt
from numpy import arange, asarray, empty_like, int64, roll, unique, zeros

from laplace_hdc.core.exceptions import EncodingError, PermutationLayoutError

_logger = getLogger(__name__)

KINDS = ('cyclic1d', 'block1d', 'cyclic2d', 'block2d')
TEST_SCALE_N = 4096


class PermutationFamily:
    """A structured trace-orthogonal family ``P_1 .. P_d`` of permutations of ``{0..N-1}``

    Use the :meth:`cyclic_1d`, :meth:`block_1d`, :meth:`cyclic_2d` and :meth:`block_2d`
    constructors rather than calling ``__init__`` directly.
    """

    def __init__(self, kind, d, N, side=None, copies=None, offsets=None):
        if kind not in KINDS:
            raise PermutationLayoutError(f'unknown permutation family "{kind}", expected one of {KINDS}')
        if d < 1 or N < 1:
            raise PermutationLayoutError(f'{kind}: d and N must be positive, got d={d}, N={N}')
        self._kind = kind
        self._d = int(d)
        self._N = int(N)
        self._side = side
        self._copies = copies
        self._offsets = None
        if kind == 'cyclic1d':
            if d > N:
                raise PermutationLayoutError(f'cyclic1d needs d <= N, got d={d}, N={N}')
            if offsets is not None:
                offsets = [int(o) for o in offsets]
                if len(offsets) != d or any(not 0 <= o < N for o in offsets):
                    raise PermutationLayoutError(f'cyclic1d needs {d} offsets in [0, {N})')
                self._offsets = offsets
        elif kind == 'block1d':
            if copies is None or N != d * copies:
                raise PermutationLayoutError(f'block1d needs N = d M, got N={N}, d={d}, M={copies}')
        elif kind == 'cyclic2d':
            if side is None or copies is None or d != side ** 2 or N != copies ** 2 or copies < side:
                raise PermutationLayoutError(f'cyclic2d needs d = L^2, N = M^2 and M >= L, '
                                             f'got d={d}, N={N}, L={side}, M={copies}')
        elif kind == 'block2d':
            if side is None or copies is None or d != side ** 2 or N != copies * side ** 2:
                raise PermutationLayoutError(f'block2d needs d = L^2 and N = M L^2, '
                                             f'got d={d}, N={N}, L={side}, M={copies}')

    @classmethod
    def cyclic_1d(cls, d, N, offsets=None):
        return cls('cyclic1d', d, N, offsets=offsets)

    @classmethod
    def block_1d(cls, d, M):
        return cls('block1d', d, d * M, copies=M)

    @classmethod
    def cyclic_2d(cls, L, M):
        return cls('cyclic2d', L * L, M * M, side=L, copies=M)

    @classmethod
    def block_2d(cls, L, M):
        return cls('block2d', L * L, M * L * L, side=L, copies=M)

    @classmethod
    def from_descriptor(cls, descriptor):
        try:
            return cls(descriptor['kind'], descriptor['d'], descriptor['N'], descriptor.get('side'),
                       descriptor.get('copies'), descriptor.get('offsets'))
        except KeyError as e:
            raise PermutationLayoutError(f'permutation family descriptor misses {e}')

    @property
    def kind(self):
        return self._kind

    @property
    def d(self):
        return self._d

    @property
    def N(self):
        return self._N

    @property
    def side(self):
        return self._side

    @property
    def copies(self):
        return self._copies

    @property
    def is_2d(self):
        return self._kind in ('cyclic2d', 'block2d')

    @property
    def descriptor(self):
        descriptor = {'kind': self._kind, 'd': self._d, 'N': self._N}
        if self._side is not None:
            descriptor['side'] = self._side
        if self._copies is not None:
            descriptor['copies'] = self._copies
        if self._offsets is not None:
            descriptor['offsets'] = list(self._offsets)
        return descriptor

    @property
    def grid_shape(self):
        """Shape in which the hypervector coordinates are laid out"""
        if self._kind == 'block1d':
            return (self._d, self._copies)
        if self._kind == 'cyclic2d':
            return (self._copies, self._copies)
        if self._kind == 'block2d':
            return (self._side, self._side, self._copies)
        return (self._N,)

    def __repr__(self):
        return f'{type(self).__name__}({", ".join(f"{k}={v!r}" for k, v in self.descriptor.items())})'

    def __str__(self):
        return f'{self._kind}-N{self._N}'

    def __eq__(self, other):
        return isinstance(other, PermutationFamily) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash((self._kind, self._d, self._N, self._side, self._copies))

    def feature_index(self, f):
        """Family index bound to feature ``f``: an int for 1D kinds, a pixel pair for 2D kinds"""
        if not 0 <= f < self._d:
            raise EncodingError(f'feature {f} out of range for {self._d} features')
        if self.is_2d:
            return divmod(int(f), self._side)
        return int(f)

    def shift(self, index):
        """Group element (shift) of the family member ``index``"""
        if self.is_2d:
            try:
                i, j = index
            except TypeError:
                raise EncodingError(f'{self._kind} members are indexed by pixel pairs, got {index!r}')
            if not (0 <= i < self._side and 0 <= j < self._side):
                raise EncodingError(f'pixel index {index!r} out of range for side {self._side}')
            return int(i), int(j)
        if not 0 <= index < self._d:
            raise EncodingError(f'index {index} out of range for {self._d} features')
        if self._offsets is not None:
            return self._offsets[index]
        return int(index)

    def source_indices(self, index):
        """Array ``src`` with ``(P_index v)[k] = v[src[k]]``"""
        s = self.shift(index)
        if self._kind == 'cyclic1d':
            return (arange(self._N, dtype=int64) + s) % self._N
        if self._kind == 'block1d':
            rows = (arange(self._d, dtype=int64) + s) % self._d
            return (rows[:, None] * self._copies + arange(self._copies, dtype=int64)[None, :]).ravel()
        i, j = s
        if self._kind == 'cyclic2d':
            M = self._copies
            rows = (arange(M, dtype=int64) + i) % M
            cols = (arange(M, dtype=int64) + j) % M
            return (rows[:, None] * M + cols[None, :]).ravel()
        L, M = self._side, self._copies
        rows = (arange(L, dtype=int64) + i) % L
        cols = (arange(L, dtype=int64) + j) % L
        cells = rows[:, None] * L + cols[None, :]
        return (cells[:, :, None] * M + arange(M, dtype=int64)[None, None, :]).ravel()

    def feature_sources(self, f):
        return self.source_indices(self.feature_index(f))

    def _check_length(self, v):
        v = asarray(v)
        if v.shape[-1] != self._N:
            raise EncodingError(f'vector of length {v.shape[-1]} does not match N={self._N}')
        return v

    def apply(self, index, v):
        """``P_index v`` along the last axis of ``v``"""
        v = self._check_length(v)
        return v[..., self.source_indices(index)]

    def inverse_apply(self, index, v):
        """``P_index^T v`` along the last axis of ``v``"""
        v = self._check_length(v)
        out = empty_like(v)
        out[..., self.source_indices(index)] = v
        return out

    def shift_group_differences(self):
        """Number of distinct relative shifts ``s_i - s_i'`` over all member pairs"""
        shifts = asarray([self.shift(self.feature_index(f)) for f in range(self._d)], dtype=int64)
        if self._kind == 'cyclic1d':
            diffs = (shifts[:, None] - shifts[None, :]) % self._N
        elif self._kind == 'block1d':
            diffs = (shifts[:, None] - shifts[None, :]) % self._d
        else:
            modulus = self._copies if self._kind == 'cyclic2d' else self._side
            delta = (shifts[:, None, :] - shifts[None, :, :]) % modulus
            diffs = delta[..., 0] * modulus + delta[..., 1]
        return int(unique(diffs).size)


def apply_permutation(family, index, v):
    """Apply member ``index`` of ``family`` to ``v``

    >>> family = PermutationFamily.cyclic_1d(d=4, N=4)
    >>> apply_permutation(family, 1, ['a', 'b', 'c', 'd']).tolist()
    ['b', 'c', 'd', 'a']
    """
    return family.apply(index, v)


def _support_keys(family, f):
    return arange(family.N, dtype=int64) * family.N + family.feature_sources(f)


def _require_test_scale(family):
    if family.N > TEST_SCALE_N:
        raise PermutationLayoutError(f'support counting is limited to N <= {TEST_SCALE_N}, got N={family.N}')


def check_trace_orthogonal(family):
    """Whether every pair of distinct members has disjoint support

    >>> check_trace_orthogonal(PermutationFamily.cyclic_1d(d=8, N=16))
    True
    >>> check_trace_orthogonal(PermutationFamily.cyclic_1d(d=2, N=8, offsets=[3, 3]))
    False
    """
    _require_test_scale(family)
    keys = [_support_keys(family, f) for f in range(family.d)]
    seen = zeros(family.N * family.N, dtype=bool)
    for k in keys:
        if seen[k].any():
            return False
        seen[k] = True
    return True


def gamma(family, method='auto'):
    """Number of nonzero entries of ``sum_i sum_i' P_i P_i'^T``

    Each product ``P_i P_i'^T`` of a shift family is the shift by ``s_i - s_i'``,
    and distinct shifts have disjoint supports, so ``auto`` counts distinct
    differences. ``support`` counts the nonzero positions explicitly and is
    limited to test-scale ``N``.

    >>> gamma(PermutationFamily.cyclic_1d(d=3, N=8))
    40
    >>> gamma(PermutationFamily.block_1d(d=2, M=3), method='support')
    12
    """
    if method == 'auto':
        return family.shift_group_differences() * family.N
    if method != 'support':
        raise PermutationLayoutError(f'unknown gamma method "{method}"')
    _require_test_scale(family)
    N = family.N
    positions = arange(N, dtype=int64)
    sources = [family.feature_sources(f) for f in range(family.d)]
    inverses = []
    for src in sources:
        inv = empty_like(src)
        inv[src] = positions
        inverses.append(inv)
    hit = zeros(N * N, dtype=bool)
    for src in sources:
        for inv in inverses:
            hit[positions * N + inv[src]] = True
    return int(hit.sum())


def largest_family(kind, d, n_cap=10000, cyclic2d_side=None):
    """The family of a kind with the largest hyperdimension not above ``n_cap``

    >>> largest_family('block1d', 784).N
    9408
    >>> largest_family('cyclic2d', 784).copies
    100
    """
    if kind == 'cyclic1d':
        return PermutationFamily.cyclic_1d(d, n_cap)
    if kind == 'block1d':
        if d > n_cap:
            raise PermutationLayoutError(f'block1d cannot fit d={d} features into N <= {n_cap}')
        return PermutationFamily.block_1d(d, n_cap // d)
    side = isqrt(d)
    if side * side != d:
        raise PermutationLayoutError(f'{kind} needs a square number of features, got d={d}')
    if kind == 'cyclic2d':
        M = cyclic2d_side if cyclic2d_side is not None else isqrt(n_cap)
        if M * M > n_cap:
            raise PermutationLayoutError(f'cyclic2d side {M} exceeds the cap N <= {n_cap}')
        return PermutationFamily.cyclic_2d(side, M)
    if kind == 'block2d':
        if d > n_cap:
            raise PermutationLayoutError(f'block2d cannot fit d={d} features into N <= {n_cap}')
        return PermutationFamily.block_2d(side, n_cap // d)
    raise PermutationLayoutError(f'unknown permutation family "{kind}", expected one of {KINDS}')


def shift_image(image, di, dj):
    """Cyclic translation ``x'(i, j) = x(i - di, j - dj)`` of a square image

    Flat images of length ``L^2`` are accepted and returned flat.

    >>> shift_image([1, 2, 3, 4], 0, 1).tolist()
    [2, 1, 4, 3]
    """
    image = asarray(image)
    if image.ndim == 1:
        side = isqrt(image.size)
        if side * side != image.size:
            raise EncodingError(f'cannot view {image.size} features as a square image')
        return roll(image.reshape(side, side), (di, dj), axis=(0, 1)).ravel()
    return roll(image, (di, dj), axis=(0, 1))
