#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.learning.classifiers
================================

Linear classifiers over encoded samples. Each class ``i`` holds a
representative ``r_i`` of length ``N`` and a sample is assigned to the class
with the largest inner product ``psi^T r_i``.

Representatives are either packed signs (binary modes, scored with XOR and
popcount) or floats (float modes):

=================== ====================================================
mode                representative
=================== ====================================================
``majority_binary`` sign of the class sum, ties to ``-1``
``majority_float``  class mean
``sgd_float``       weights of a softmax layer trained with Adam
``sgd_binary``      same weights clamped to ``[-1, 1]`` while training, then signed
=================== ====================================================
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from numpy import asarray, bincount, clip, concatenate, exp, float64, int64, log, sqrt, where, zeros
from numpy.random import default_rng

from laplace_hdc.core.encoder import PackedBatch, pack, popcount, unpack
from laplace_hdc.core.exceptions import EncodingError, TrainingError

_logger = getLogger(__name__)

MODES = ('majority_binary', 'majority_float', 'sgd_float', 'sgd_binary')
BINARY_MODES = ('majority_binary', 'sgd_binary')
PREDICT_BLOCK = 2048
UNPACK_BLOCK = 4096


class ClassModel(namedtuple('ClassModel', 'mode representatives N provenance')):
    """Class representatives and the encoder they were trained for

    :param mode: one of :data:`MODES`
    :param representatives: :class:`.encoder.PackedBatch` of ``c`` rows in binary modes,
        ``c`` x ``N`` float64 array in float modes; row ``i - 1`` belongs to class ``i``
    :param N: hyperdimension
    :param provenance: metadata re-creating the encoder and feature transform
    """

    def __new__(cls, mode, representatives, N, provenance=None):
        if mode not in MODES:
            raise TrainingError(f'unknown classifier mode "{mode}", expected one of {MODES}')
        if mode in BINARY_MODES:
            if not isinstance(representatives, PackedBatch) or representatives.N != N:
                raise TrainingError(f'{mode} representatives must be packed hypervectors of length {N}')
        else:
            representatives = asarray(representatives, dtype=float64)
            if representatives.ndim != 2 or representatives.shape[1] != N:
                raise TrainingError(f'{mode} representatives must be a c x {N} matrix')
        return super().__new__(cls, mode, representatives, int(N), dict(provenance or {}))

    @property
    def c(self):
        return len(self.representatives)

    @property
    def binary(self):
        return self.mode in BINARY_MODES

    def float_representatives(self):
        if self.binary:
            return unpack(self.representatives).astype(float64)
        return self.representatives


def _as_batch(encoded):
    if isinstance(encoded, PackedBatch):
        return encoded
    try:
        return PackedBatch.stack(encoded)
    except EncodingError as e:
        raise TrainingError(str(e))


def _class_counts(encoded, labels, classes=None):
    labels = asarray(labels, dtype=int64)
    if labels.ndim != 1 or labels.shape[0] != len(encoded):
        raise TrainingError(f'{labels.shape[0] if labels.ndim == 1 else labels.shape} labels '
                            f'for {len(encoded)} encodings')
    if labels.size == 0:
        raise TrainingError('cannot train on an empty set of encodings')
    if labels.min() < 1:
        raise TrainingError(f'class ids start at 1, got {labels.min()}')
    c = int(labels.max()) if classes is None else int(classes)
    if labels.max() > c:
        raise TrainingError(f'class id {labels.max()} exceeds the class count {c}')
    counts = bincount(labels - 1, minlength=c)
    empty = [i + 1 for i in range(c) if counts[i] == 0]
    if empty:
        raise TrainingError(f'classes without training samples: {empty}')
    return labels, counts


def _unpacked_blocks(encoded, block=UNPACK_BLOCK):
    for start in range(0, len(encoded), block):
        yield start, unpack(encoded[start:start + block])


def train_majority(encoded, labels, mode='binary', classes=None, provenance=None):
    """Class representatives by majority vote (``binary``) or class mean (``float``)

    :param encoded: :class:`.encoder.PackedBatch` of training encodings
    :param labels: class ids ``1..c``, one per encoding
    :param mode: ``binary`` or ``float``
    :param classes: class count, the largest label if omitted
    :rtype: ClassModel
    """
    if mode not in ('binary', 'float'):
        raise TrainingError(f'majority vote mode must be "binary" or "float", got "{mode}"')
    encoded = _as_batch(encoded)
    labels, counts = _class_counts(encoded, labels, classes)
    sums = zeros((len(counts), encoded.N), dtype=int64)
    for start, signs in _unpacked_blocks(encoded):
        block_labels = labels[start:start + signs.shape[0]] - 1
        for i in range(len(counts)):
            rows = signs[block_labels == i]
            if rows.shape[0]:
                sums[i] += rows.sum(axis=0, dtype=int64)
    if mode == 'binary':
        return ClassModel('majority_binary', pack(where(sums > 0, 1, -1)), encoded.N, provenance)
    return ClassModel('majority_float', sums / counts[:, None], encoded.N, provenance)


class Adam:
    """Adaptive moment estimation for a single parameter array"""

    def __init__(self, shape, lr=0.01, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = zeros(shape)
        self.v = zeros(shape)
        self.t = 0

    def step(self, param, grad):
        """Update ``param`` in place"""
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * (grad * grad)
        param -= (self.lr / bc1) * self.m / (sqrt(self.v / bc2) + self.epsilon)


def _softmax_cross_entropy(logits, targets):
    """Mean loss and its gradient with respect to the logits"""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = exp(shifted)
    total = e.sum(axis=1, keepdims=True)
    rows = range(logits.shape[0])
    loss = float((log(total[:, 0]) - shifted[rows, targets]).mean())
    grad = e / total
    grad[rows, targets] -= 1.0
    return loss, grad / logits.shape[0]


def train_sgd(encoded, labels, mode='float', lr=0.01, epochs=3, batch_size=64, seed=0, clamp='step',
              classes=None, provenance=None, history=None):
    """Train a bias-free softmax layer on the ``+-1`` encodings with Adam

    Samples are reshuffled every epoch from a generator seeded with ``seed``.
    In ``binary`` mode the weights are clamped to ``[-1, 1]`` after every
    optimizer step (``clamp='step'``) or after every epoch (``clamp='epoch'``),
    and signed after the last epoch with ``sign(0) = +1``.

    :param encoded: :class:`.encoder.PackedBatch` of training encodings
    :param labels: class ids ``1..c``
    :param mode: ``float`` or ``binary``
    :param history: list receiving the mean training loss of every epoch
    :rtype: ClassModel
    """
    if mode not in ('float', 'binary'):
        raise TrainingError(f'SGD mode must be "float" or "binary", got "{mode}"')
    if clamp not in ('step', 'epoch'):
        raise TrainingError(f'clamp must be "step" or "epoch", got "{clamp}"')
    encoded = _as_batch(encoded)
    labels, counts = _class_counts(encoded, labels, classes)
    c, N, n = len(counts), encoded.N, len(encoded)
    rng = default_rng(seed)
    bound = 1.0 / sqrt(N)
    weights = rng.uniform(-bound, bound, size=(c, N))
    optimizer = Adam(weights.shape, lr=lr)
    binary = mode == 'binary'
    for epoch in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            inputs = unpack(encoded.take(idx)).astype(float64)
            loss, grad_logits = _softmax_cross_entropy(inputs @ weights.T, labels[idx] - 1)
            optimizer.step(weights, grad_logits.T @ inputs)
            if binary and clamp == 'step':
                clip(weights, -1.0, 1.0, out=weights)
            losses.append(loss * len(idx))
        if binary and clamp == 'epoch':
            clip(weights, -1.0, 1.0, out=weights)
        epoch_loss = sum(losses) / n
        if history is not None:
            history.append(epoch_loss)
        _logger.info(f'SGD epoch {epoch + 1}/{epochs}: mean loss {epoch_loss:.6f}')
    if binary:
        return ClassModel('sgd_binary', pack(where(weights >= 0, 1, -1)), N, provenance)
    return ClassModel('sgd_float', weights, N, provenance)


def train(mode, encoded, labels, **kwargs):
    """Train a model of any of :data:`MODES`"""
    if mode == 'majority_binary':
        return train_majority(encoded, labels, 'binary', **kwargs)
    if mode == 'majority_float':
        return train_majority(encoded, labels, 'float', **kwargs)
    if mode == 'sgd_float':
        return train_sgd(encoded, labels, 'float', **kwargs)
    if mode == 'sgd_binary':
        return train_sgd(encoded, labels, 'binary', **kwargs)
    raise TrainingError(f'unknown classifier mode "{mode}", expected one of {MODES}')


def scores(model, encoded):
    """``n`` x ``c`` inner products of encodings with the representatives"""
    if encoded.N != model.N:
        raise EncodingError(f'encodings of length {encoded.N} do not match the model length {model.N}')
    if model.binary:
        reps = model.representatives.words
        differing = popcount(encoded.words[:, None, :] ^ reps[None, :, :]).sum(axis=-1, dtype=int64)
        return model.N - 2 * differing
    return unpack(encoded).astype(float64) @ model.representatives.T


def predict_batch(model, encoded, workers=1):
    """Class ids ``1..c`` of every encoding, ties going to the smallest id

    :param model: :class:`ClassModel`
    :param encoded: :class:`.encoder.PackedBatch`
    :param workers: threads scoring blocks of samples
    :rtype: numpy.ndarray
    """
    encoded = _as_batch(encoded)
    if encoded.N != model.N:
        raise EncodingError(f'encodings of length {encoded.N} do not match the model length {model.N}')
    blocks = [encoded[start:start + PREDICT_BLOCK] for start in range(0, len(encoded), PREDICT_BLOCK)]
    if not blocks:
        return zeros(0, dtype=int64)

    def _argmax(block):
        return scores(model, block).argmax(axis=1) + 1

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_argmax, blocks))
    else:
        parts = [_argmax(b) for b in blocks]
    return concatenate(parts).astype(int64)


def predict(model, psi):
    """Class id of a single encoding

    :param model: :class:`ClassModel`
    :param psi: :class:`.encoder.PackedHypervector`
    :rtype: int
    """
    if psi.N != model.N:
        raise EncodingError(f'encoding of length {psi.N} does not match the model length {model.N}')
    return int(predict_batch(model, PackedBatch(psi.words[None, :], psi.N))[0])


def accuracy(model, encoded, labels, workers=1):
    """Fraction of encodings assigned to their label"""
    labels = asarray(labels, dtype=int64)
    if labels.shape[0] != len(encoded):
        raise TrainingError(f'{labels.shape[0]} labels for {len(encoded)} encodings')
    if labels.size == 0:
        return float('nan')
    return float((predict_batch(model, encoded, workers) == labels).mean())

