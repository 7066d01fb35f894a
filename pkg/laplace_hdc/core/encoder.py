#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.encoder
========================

Binding of feature vectors into bit-packed hypervectors.

A sample ``x`` in ``{1..m}^d`` is encoded as ``psi_x = prod_i P_i v_{x(i)}``
(entrywise product). In packed form a bit set to 1 stands for ``-1`` and a
cleared bit for ``+1``, so the entrywise product is a XOR and the inner
product of two encodings is ``N - 2 popcount(a XOR b)``.

Bit ``k`` lives in word ``k // 64`` at position ``k % 64``; words are
little-endian 64-bit unsigned integers and the padding bits past ``N`` are
always zero.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property
from logging import getLogger
from numpy import (array_split, ascontiguousarray, asarray, dtype, int8, int64, packbits, pad as numpy_pad,
                   uint8, uint64, unpackbits, zeros)
from numpy.random import default_rng

from laplace_hdc.core.exceptions import EncodingError
from laplace_hdc.core.hypervectors import generate_hypervectors
from laplace_hdc.core.kernel import KernelSpec, build_kernel
from laplace_hdc.core.permutations import PermutationFamily
from laplace_hdc.core.utils import derive_seed, words_for

_logger = getLogger(__name__)

WORD = dtype('<u8')

_S55 = uint64(0x5555555555555555)
_S33 = uint64(0x3333333333333333)
_S0F = uint64(0x0F0F0F0F0F0F0F0F)
_S01 = uint64(0x0101010101010101)


def popcount(words):
    """Number of set bits of each 64-bit word (SWAR bit counting)

    >>> popcount([0, 1, 3, 2 ** 64 - 1]).tolist()
    [0, 1, 2, 64]
    """
    w = asarray(words, dtype=uint64)
    w = w - ((w >> uint64(1)) & _S55)
    w = (w & _S33) + ((w >> uint64(2)) & _S33)
    w = (w + (w >> uint64(4))) & _S0F
    return (w * _S01) >> uint64(56)


def _pack_bits(bits):
    """Pack a boolean array along its last axis into little-endian words"""
    bits = asarray(bits, dtype=bool)
    packed = packbits(bits, axis=-1, bitorder='little')
    pad = words_for(bits.shape[-1]) * 8 - packed.shape[-1]
    if pad:
        packed = numpy_pad(packed, [(0, 0)] * (packed.ndim - 1) + [(0, pad)])
    return ascontiguousarray(packed).view(WORD)


def _unpack_bits(words, N):
    words = ascontiguousarray(asarray(words, dtype=WORD))
    return unpackbits(words.view(uint8), axis=-1, count=N, bitorder='little').astype(bool)


class PackedHypervector(namedtuple('PackedHypervector', 'words N')):
    """An encoded sample, ``words`` holding ``ceil(N / 64)`` 64-bit words"""

    def __new__(cls, words, N):
        words = asarray(words, dtype=WORD)
        if words.shape != (words_for(N),):
            raise EncodingError(f'{words.shape} words cannot hold a hypervector of {N} bits')
        return super().__new__(cls, words, int(N))

    def __eq__(self, other):
        return isinstance(other, PackedHypervector) and self.N == other.N and bool((self.words == other.words).all())

    def __hash__(self):
        return hash((self.N, self.words.tobytes()))


class PackedBatch(namedtuple('PackedBatch', 'words N')):
    """Encodings of several samples, one row of ``words`` per sample

    Behaves as a sequence of :class:`PackedHypervector`.
    """

    def __new__(cls, words, N):
        words = asarray(words, dtype=WORD)
        if words.ndim != 2 or words.shape[1] != words_for(N):
            raise EncodingError(f'{words.shape} words cannot hold hypervectors of {N} bits')
        return super().__new__(cls, words, int(N))

    def __len__(self):
        return self.words.shape[0]

    def __getitem__(self, item):
        if isinstance(item, slice):
            return PackedBatch(self.words[item], self.N)
        return PackedHypervector(self.words[item], self.N)

    def __iter__(self):
        for row in self.words:
            yield PackedHypervector(row, self.N)

    def __eq__(self, other):
        return (isinstance(other, PackedBatch) and self.N == other.N
                and self.words.shape == other.words.shape and bool((self.words == other.words).all()))

    def __hash__(self):
        return hash((self.N, self.words.tobytes()))

    def take(self, indices):
        return PackedBatch(self.words[asarray(indices, dtype=int64)], self.N)

    @classmethod
    def stack(cls, hypervectors, N=None):
        hypervectors = list(hypervectors)
        if not hypervectors:
            if N is None:
                raise EncodingError('the length of an empty batch must be given')
            return cls(zeros((0, words_for(N)), dtype=WORD), N)
        N = hypervectors[0].N if N is None else N
        if any(h.N != N for h in hypervectors):
            raise EncodingError('cannot stack hypervectors of different lengths')
        return cls([h.words for h in hypervectors], N)


def pack(signs):
    """Pack ``+-1`` entries along the last axis

    >>> pack([1, -1, -1, 1]).words.tolist()
    [6]
    """
    signs = asarray(signs)
    N = signs.shape[-1]
    words = _pack_bits(signs < 0)
    if signs.ndim == 1:
        return PackedHypervector(words, N)
    return PackedBatch(words.reshape(-1, words.shape[-1]), N)


def unpack(psi):
    """``+-1`` int8 entries of a packed hypervector or batch

    >>> unpack(pack([1, -1, -1, 1])).tolist()
    [1, -1, -1, 1]
    """
    bits = _unpack_bits(psi.words, psi.N)
    return (1 - 2 * bits.astype(int8)).astype(int8)


def _check_lengths(a, b):
    if a.N != b.N:
        raise EncodingError(f'hypervector lengths differ: {a.N} and {b.N}')


def bind(a, b):
    """Entrywise product ``a * b`` of two packed hypervectors (or a batch and a hypervector)"""
    _check_lengths(a, b)
    words = a.words ^ b.words
    if words.ndim == 1:
        return PackedHypervector(words, a.N)
    return PackedBatch(words, a.N)


def similarity(a, b):
    """Inner product of the ``+-1`` forms of ``a`` and ``b``

    A batch against a single hypervector gives one score per row.

    >>> a = pack([1, 1, -1, 1])
    >>> similarity(a, a)
    4
    >>> similarity(a, pack([-1, -1, 1, -1]))
    -4
    """
    _check_lengths(a, b)
    differing = popcount(a.words ^ b.words).sum(axis=-1, dtype=int64)
    if differing.ndim == 0:
        return int(a.N - 2 * differing)
    return a.N - 2 * differing


def _flip_mask(N, k, seed):
    mask = zeros(N, dtype=bool)
    mask[default_rng(seed).permutation(N)[:k]] = True
    return _pack_bits(mask)


def _check_flip_count(N, k):
    if int(k) != k or not 0 <= k <= N:
        raise EncodingError(f'cannot flip {k} of {N} bits')
    return int(k)


def flip_bits(psi, k, seed):
    """Negate ``k`` distinct positions of ``psi`` drawn uniformly without replacement

    >>> psi = pack([1] * 100)
    >>> similarity(psi, flip_bits(psi, 25, seed=3))
    50
    """
    k = _check_flip_count(psi.N, k)
    return PackedHypervector(psi.words ^ _flip_mask(psi.N, k, seed), psi.N)


def flip_bits_batch(batch, k, seed):
    """:func:`flip_bits` on every row, row ``r`` using the seed derived from ``(seed, r)``"""
    k = _check_flip_count(batch.N, k)
    words = batch.words.copy()
    if k:
        for r in range(len(batch)):
            words[r] ^= _flip_mask(batch.N, k, derive_seed(seed, r))
    return PackedBatch(words, batch.N)


class EncoderConfig(namedtuple('EncoderConfig', 'hypervectors family d')):
    """Everything needed to encode samples of ``d`` features

    :param hypervectors: :class:`.hypervectors.HypervectorSet` of the alphabet
    :param family: :class:`.permutations.PermutationFamily` binding the features
    :param d: number of features
    """

    def __new__(cls, hypervectors, family, d=None):
        d = family.d if d is None else int(d)
        if family.d != d:
            raise EncodingError(f'permutation family binds {family.d} features, not {d}')
        if family.N != hypervectors.N:
            raise EncodingError(f'permutation family acts on N={family.N}, hypervectors have N={hypervectors.N}')
        return super().__new__(cls, hypervectors, family, d)

    @property
    def N(self):
        return self.hypervectors.N

    @property
    def m(self):
        return self.hypervectors.m

    @cached_property
    def bits(self):
        """Base hypervectors as an ``m`` x ``N`` boolean array"""
        return ascontiguousarray(self.hypervectors.bits())

    @property
    def provenance(self):
        """Seeds and descriptors from which :meth:`from_provenance` rebuilds this encoder"""
        kernel = self.hypervectors.kernel
        return {
            'kernel': kernel.asdict() if kernel is not None else None,
            'family': self.family.descriptor,
            'seed': int(self.hypervectors.seed),
            'N': self.N,
            'd': self.d,
        }

    @classmethod
    def from_provenance(cls, provenance, workers=1):
        if provenance.get('kernel') is None:
            raise EncodingError('encoders built from user affinities cannot be re-created from provenance')
        return build_encoder(KernelSpec(**provenance['kernel']),
                             PermutationFamily.from_descriptor(provenance['family']),
                             provenance['seed'], workers=workers)


def build_encoder(spec, family, seed, workers=1):
    """Kernel, hypervectors and encoder configuration of one pipeline run"""
    hypervectors = generate_hypervectors(build_kernel(spec), family.N, seed, workers=workers)
    return EncoderConfig(hypervectors, family, family.d)


def _check_features(X, cfg):
    X = asarray(getattr(X, 'values', X))
    if X.ndim == 1:
        X = X.reshape(0, cfg.d) if X.size == 0 else X[None, :]
    if X.ndim != 2 or (X.size and X.shape[1] != cfg.d):
        raise EncodingError(f'feature vectors must have {cfg.d} entries, got shape {X.shape}')
    if X.size:
        lo, hi = X.min(), X.max()
        if lo < 1 or hi > cfg.m:
            raise EncodingError(f'feature values must lie in 1..{cfg.m}, got range {lo}..{hi}')
    return X.astype(int64, copy=False)


def _encode_features(X, cfg, features):
    """XOR of the permuted hypervectors of ``features``, packed, one row per sample"""
    n = X.shape[0]
    bits = cfg.bits
    if n < cfg.m:
        acc = zeros((n, cfg.N), dtype=bool)
        for f in features:
            acc ^= bits[X[:, f] - 1][:, cfg.family.feature_sources(f)]
        return _pack_bits(acc)
    # one packed table of permuted hypervectors per feature, rows looked up per sample
    acc = zeros((n, words_for(cfg.N)), dtype=WORD)
    for f in features:
        table = _pack_bits(bits.take(cfg.family.feature_sources(f), axis=1))
        acc ^= table[X[:, f] - 1]
    return acc


def encode_batch(X, cfg, workers=1):
    """Encode every row of ``X``

    ``workers`` threads each bind a share of the features; their partial
    products are XOR-combined, so the result does not depend on the thread
    count.

    :param X: ``n`` x ``d`` integer feature values in ``1..m``, or a feature batch
    :param cfg: :class:`EncoderConfig`
    :param workers: number of threads
    :rtype: PackedBatch
    """
    X = _check_features(X, cfg)
    if X.shape[0] == 0:
        return PackedBatch(zeros((0, words_for(cfg.N)), dtype=WORD), cfg.N)
    if workers > 1 and cfg.d > 1:
        chunks = [c for c in array_split(range(cfg.d), min(workers, cfg.d)) if len(c)]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _encode_features(X, cfg, c), chunks))
        words = parts[0]
        for part in parts[1:]:
            words ^= part
    else:
        words = _encode_features(X, cfg, range(cfg.d))
    _logger.debug(f'encoded {X.shape[0]} samples of {cfg.d} features into N={cfg.N}')
    return PackedBatch(words, cfg.N)


def encode(x, cfg):
    """Encode a single feature vector

    :param x: ``d`` feature values in ``1..m``
    :param cfg: :class:`EncoderConfig`
    :rtype: PackedHypervector
    """
    x = asarray(x)
    if x.ndim != 1:
        raise EncodingError(f'a single feature vector is one-dimensional, got shape {x.shape}')
    return encode_batch(x, cfg)[0]
