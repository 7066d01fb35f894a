#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.learning.features
=============================

Feature pipelines mapping grayscale images to integer feature vectors in
``{1..256}^d``:

* ``raw``: every pixel is a feature, ``value = pixel + 1``;
* ``haar``: valid correlations with a bank of nine 4 x 4 Haar-Walsh filters;
* ``svd``: raw features rotated onto the eigenvectors of the training Gram matrix.

Real-valued features are quantized by an affine min-max map fitted on the
training images only, and test images always reuse the training fit.
"""

from collections import namedtuple
from logging import getLogger
from numpy import (abs, array, asarray, clip, einsum, float64, int16, maximum, outer, uint8, vstack, zeros)
from numpy.lib.stride_tricks import sliding_window_view

from laplace_hdc.core.exceptions import ConfigurationError, DegenerateDataError
from laplace_hdc.core.numerics import sym_eigen
from laplace_hdc.core.utils import round_half_up

_logger = getLogger(__name__)

ALPHABET_SIZE = 256
CONSTANT_LEVEL = 128
HAAR_SIZE = 4
NULL_EIGEN_FLOOR = 1e-10
CONSTANT_TOLERANCE = 1e-9
APPLY_BLOCK = 8192

# 4-point Haar-Walsh basis: DC, one sign change, two sign changes
HAAR_1D = (
    array([1, 1, 1, 1]) / 2,
    array([1, 1, -1, -1]) / 2,
    array([1, -1, 1, -1]) / 2,
)


class ImageBatch(namedtuple('ImageBatch', 'pixels side')):
    """Square grayscale images, ``pixels`` of shape ``(n, L, L)`` with values 0..255"""

    def __new__(cls, pixels, side=None):
        pixels = asarray(pixels)
        if pixels.ndim == 2 and side is not None:
            pixels = pixels.reshape(-1, side, side)
        if pixels.ndim != 3 or pixels.shape[1] != pixels.shape[2]:
            raise DegenerateDataError(f'images must be square, got pixel array of shape {pixels.shape}')
        if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
            raise DegenerateDataError('pixel values must lie in 0..255')
        return super().__new__(cls, pixels.astype(uint8, copy=False), pixels.shape[1])

    @property
    def count(self):
        return self.pixels.shape[0]

    def flat(self):
        return self.pixels.reshape(self.count, self.side * self.side)

    def take(self, indices):
        return ImageBatch(self.pixels[indices], self.side)


class FeatureBatch(namedtuple('FeatureBatch', 'values m transform')):
    """Integer feature vectors, one row per sample, values in ``1..m``

    ``transform`` is the fitted feature transform that produced the rows.
    """

    @property
    def count(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def provenance(self):
        return self.transform.name


class HaarFilterBank(namedtuple('HaarFilterBank', 'filters stride')):
    """Nine 4 x 4 filters ``h_a h_b^T`` and the stride at which they are correlated"""

    def __new__(cls, filters=None, stride=4):
        if filters is None:
            filters = array([outer(ha, hb) for ha in HAAR_1D for hb in HAAR_1D])
        filters = asarray(filters, dtype=float64)
        if filters.shape != (9, HAAR_SIZE, HAAR_SIZE):
            raise ConfigurationError(f'a Haar filter bank holds 9 filters of {HAAR_SIZE}x{HAAR_SIZE}, '
                                     f'got shape {filters.shape}')
        if int(stride) != stride or stride < 1:
            raise ConfigurationError(f'Haar stride must be a positive integer, got {stride}')
        return super().__new__(cls, filters, int(stride))

    def positions(self, side):
        """Number of filter positions per image axis"""
        if side < HAAR_SIZE:
            raise ConfigurationError(f'Haar features need images of side at least {HAAR_SIZE}, got {side}')
        if (side - HAAR_SIZE) % self.stride:
            raise ConfigurationError(f'stride {self.stride} does not tile images of side {side}: '
                                     f'{side} - {HAAR_SIZE} must be divisible by the stride')
        return (side - HAAR_SIZE) // self.stride + 1

    def feature_count(self, side):
        """``9 ((L - 4) / s + 1)^2``

        >>> HaarFilterBank(stride=4).feature_count(28)
        441
        """
        return len(self.filters) * self.positions(side) ** 2

    def responses(self, images):
        """Filter responses, filter-major, one row of ``feature_count`` values per image"""
        self.positions(images.side)
        rows = []
        for start in range(0, images.count, APPLY_BLOCK):
            pixels = images.pixels[start:start + APPLY_BLOCK].astype(float64)
            windows = sliding_window_view(pixels, (HAAR_SIZE, HAAR_SIZE), axis=(1, 2))
            windows = windows[:, ::self.stride, ::self.stride]
            r = einsum('npqij,fij->nfpq', windows, self.filters)
            rows.append(r.reshape(r.shape[0], -1))
        if not rows:
            return zeros((0, self.feature_count(images.side)))
        return vstack(rows)


class MinMaxQuantizer(namedtuple('MinMaxQuantizer', 'low high')):
    """Affine map of each coordinate from its training range onto ``{1..256}``

    Constant coordinates map to level 128 (feature value 129).
    """

    @classmethod
    def fit(cls, values):
        values = asarray(values, dtype=float64)
        if values.shape[0] == 0:
            raise DegenerateDataError('cannot fit feature ranges on an empty training set')
        return cls(values.min(axis=0), values.max(axis=0))

    @property
    def constant(self):
        scale = 1.0 + maximum(abs(self.low), abs(self.high))
        return (self.high - self.low) <= CONSTANT_TOLERANCE * scale

    def transform(self, values):
        values = asarray(values, dtype=float64)
        constant = self.constant
        span = (self.high - self.low).copy()
        span[constant] = 1.0
        levels = clip(round_half_up((values - self.low) / span * (ALPHABET_SIZE - 1)), 0, ALPHABET_SIZE - 1)
        levels[:, constant] = CONSTANT_LEVEL
        return (levels + 1).astype(int16)


class RawTransform:
    """Pixels as features, ``value = pixel + 1``"""
    name = 'raw'

    def apply(self, images):
        return FeatureBatch(images.flat().astype(int16) + 1, ALPHABET_SIZE, self)

    def state(self):
        return {}, {}

    @classmethod
    def from_state(cls, meta, arrays):
        return cls()


class HaarTransform:
    """Haar filter responses quantized with ranges fitted on training images"""
    name = 'haar'

    def __init__(self, bank, quantizer):
        self.bank = bank
        self.quantizer = quantizer

    @classmethod
    def fit(cls, images, bank):
        quantizer = MinMaxQuantizer.fit(bank.responses(images))
        _warn_constant(quantizer, 'Haar')
        return cls(bank, quantizer)

    def apply(self, images):
        return FeatureBatch(self.quantizer.transform(self.bank.responses(images)), ALPHABET_SIZE, self)

    def state(self):
        return ({'stride': self.bank.stride},
                {'haar_filters': self.bank.filters, 'low': self.quantizer.low, 'high': self.quantizer.high})

    @classmethod
    def from_state(cls, meta, arrays):
        return cls(HaarFilterBank(arrays['haar_filters'], meta['stride']),
                   MinMaxQuantizer(arrays['low'], arrays['high']))


class SvdTransform:
    """Raw features rotated onto the leading eigenvectors of the training Gram matrix

    :param basis: ``d`` x ``rank`` matrix ``V``; columns of null eigenvalues are zero
    :param eigenvalues: the Gram eigenvalues of the kept columns, non-increasing
    :param quantizer: :class:`MinMaxQuantizer` fitted on ``X V`` of the training rows
    """
    name = 'svd'

    def __init__(self, basis, eigenvalues, quantizer):
        self.basis = basis
        self.eigenvalues = eigenvalues
        self.quantizer = quantizer

    @staticmethod
    def _pixels(features):
        return asarray(features.values, dtype=float64) - 1

    @classmethod
    def fit(cls, features, rank=None):
        rank = features.d if rank is None else int(rank)
        if not 1 <= rank <= features.d:
            raise ConfigurationError(f'SVD rank must lie in 1..{features.d}, got {rank}')
        X = cls._pixels(features)
        decomposition = sym_eigen(X.T @ X)
        eigenvalues = decomposition.eigenvalues[:rank].copy()
        basis = decomposition.eigenvectors[:, :rank].copy()
        floor = NULL_EIGEN_FLOOR * max(float(decomposition.eigenvalues[0]), 0.0)
        null = eigenvalues <= floor
        basis[:, null] = 0.0
        eigenvalues[null] = 0.0
        _logger.info(f'SVD features: rank {rank}, {int((~null).sum())} non-null directions')
        quantizer = MinMaxQuantizer.fit(X @ basis)
        _warn_constant(quantizer, 'SVD')
        return cls(basis, eigenvalues, quantizer)

    def project(self, features):
        """``X V`` before quantization"""
        return self._pixels(features) @ self.basis

    def apply_features(self, features):
        return FeatureBatch(self.quantizer.transform(self.project(features)), ALPHABET_SIZE, self)

    def apply(self, images):
        return self.apply_features(quantize_raw(images))

    def state(self):
        return ({}, {'svd_basis': self.basis, 'svd_eigenvalues': self.eigenvalues,
                     'low': self.quantizer.low, 'high': self.quantizer.high})

    @classmethod
    def from_state(cls, meta, arrays):
        return cls(arrays['svd_basis'], arrays['svd_eigenvalues'], MinMaxQuantizer(arrays['low'], arrays['high']))


TRANSFORMS = {t.name: t for t in (RawTransform, HaarTransform, SvdTransform)}


def _warn_constant(quantizer, label):
    constant = int(quantizer.constant.sum())
    if constant:
        _logger.warning(f'{label} features: {constant} coordinates are constant on the training set '
                        f'and map to level {CONSTANT_LEVEL}')


def quantize_raw(images):
    """Pixels shifted into the alphabet ``1..256``

    >>> quantize_raw(ImageBatch([[[0, 255], [7, 1]]])).values.tolist()
    [[1, 256, 8, 2]]
    """
    return RawTransform().apply(images)


def haar_features(train, test, bank=None):
    """Quantized Haar features of training and test images, ranges fitted on ``train``

    :param train: :class:`ImageBatch` the quantization is fitted on
    :param test: :class:`ImageBatch` transformed with the training fit
    :param bank: :class:`HaarFilterBank`, the default Haar-Walsh bank at stride 4 if omitted
    :return: ``(train_features, test_features)``
    """
    transform = HaarTransform.fit(train, bank if bank is not None else HaarFilterBank())
    return transform.apply(train), transform.apply(test)


def svd_features(train, test, rank=None):
    """Rotate raw feature batches onto the training Gram eigenvectors

    :param train: :class:`FeatureBatch` of raw features the rotation is fitted on
    :param test: :class:`FeatureBatch` of raw features
    :param rank: number of leading directions kept, all ``d`` if omitted
    :return: ``(train_features, test_features)``
    """
    transform = SvdTransform.fit(train, rank)
    return transform.apply_features(train), transform.apply_features(test)


def fit_features(mode, train, stride=4, rank=None):
    """Fit the feature transform of a pipeline on training images"""
    if mode == 'raw':
        return RawTransform()
    if mode == 'haar':
        return HaarTransform.fit(train, HaarFilterBank(stride=stride))
    if mode == 'svd':
        return SvdTransform.fit(quantize_raw(train), rank)
    raise ConfigurationError(f'unknown feature mode "{mode}"')


def transform_from_state(name, meta, arrays):
    try:
        return TRANSFORMS[name].from_state(meta, arrays)
    except KeyError as e:
        raise ConfigurationError(f'feature transform "{name}" cannot be restored, missing {e}')
