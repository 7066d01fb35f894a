#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from math import isnan
from numpy import array, float64, int64, repeat
from numpy.random import default_rng
from numpy.testing import assert_allclose, assert_array_equal
import pytest

from laplace_hdc.core.encoder import PackedBatch, flip_bits_batch, pack, unpack
from laplace_hdc.core.exceptions import EncodingError, TrainingError
from laplace_hdc.learning.classifiers import (MODES, Adam, ClassModel, accuracy, predict, predict_batch, scores, train,
                                              train_majority, train_sgd)

N = 256


@pytest.fixture
def prototypes():
    return default_rng(0).choice([-1, 1], size=(2, N))


@pytest.fixture
def toy(prototypes):
    """20 noisy copies of each of two prototypes, a tenth of the bits flipped"""
    clean = pack(repeat(prototypes, 20, axis=0))
    return flip_bits_batch(clean, N // 10, seed=1), repeat(array([1, 2]), 20)


@pytest.mark.parametrize('mode', MODES)
def test_every_mode_separates_the_toy_classes(toy, mode):
    encoded, labels = toy
    model = train(mode, encoded, labels, **({'epochs': 5, 'batch_size': 8} if mode.startswith('sgd') else {}))
    assert model.mode == mode
    assert model.c == 2
    assert accuracy(model, encoded, labels) == 1.0


def test_majority_vote_recovers_prototypes(toy, prototypes):
    model = train_majority(*toy)
    assert model.binary
    assert (unpack(model.representatives) == prototypes).mean() > 0.95


def test_majority_float_is_the_class_mean(toy):
    encoded, labels = toy
    model = train_majority(encoded, labels, mode='float')
    signs = unpack(encoded).astype(float64)
    assert_allclose(model.representatives, [signs[labels == 1].mean(axis=0), signs[labels == 2].mean(axis=0)])


def test_majority_ties_go_negative():
    encoded = pack([[1, -1, 1], [-1, 1, 1], [1, 1, 1]])
    model = train_majority(encoded, [1, 1, 2])
    assert unpack(model.representatives).tolist() == [[-1, -1, 1], [1, 1, 1]]


def test_sgd_is_reproducible(toy):
    first = train_sgd(*toy, epochs=2, seed=3)
    second = train_sgd(*toy, epochs=2, seed=3)
    assert_array_equal(first.representatives, second.representatives)


def test_sgd_loss_decreases(toy):
    history = []
    train_sgd(*toy, epochs=4, batch_size=8, history=history)
    assert len(history) == 4
    assert history[-1] < history[0]


@pytest.mark.parametrize('clamp', ('step', 'epoch'))
def test_binary_sgd_signs_its_weights(toy, clamp):
    model = train_sgd(*toy, mode='binary', clamp=clamp, epochs=2)
    assert model.mode == 'sgd_binary'
    assert isinstance(model.representatives, PackedBatch)
    assert set(model.float_representatives().ravel().tolist()) <= {-1.0, 1.0}


def test_adam_moves_against_the_gradient():
    param = array([0.0, 0.0])
    optimizer = Adam(param.shape, lr=0.1)
    optimizer.step(param, array([2.0, -0.5]))
    assert_allclose(param, [-0.1, 0.1], rtol=1e-6)


@pytest.mark.parametrize('labels, classes', (
    ([1, 2], None),
    ([0, 1, 1], None),
    ([1, 1, 1], 2),
    ([1, 3, 3], None),
))
def test_training_rejects_bad_labels(labels, classes):
    encoded = pack([[1, -1], [1, 1], [-1, -1]])
    with pytest.raises(TrainingError):
        train_majority(encoded, labels, classes=classes)


def test_training_rejects_empty_input():
    with pytest.raises(TrainingError):
        train_sgd(PackedBatch.stack([], N=8), [])


def test_unknown_mode():
    with pytest.raises(TrainingError):
        train('knn', pack([[1, 1]]), [1])


def test_binary_scores_are_inner_products(toy):
    encoded, labels = toy
    model = train_majority(encoded, labels)
    expected = unpack(encoded).astype(int64) @ unpack(model.representatives).astype(int64).T
    assert_array_equal(scores(model, encoded), expected)


def test_ties_go_to_the_smallest_class():
    reps = array([[1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    model = ClassModel('majority_float', reps, 2)
    assert predict(model, pack([1, -1])) == 1
    assert predict_batch(model, pack([[1, -1], [-1, 1]])).tolist() == [1, 3]


def test_prediction_with_workers(toy):
    encoded, labels = toy
    model = train_majority(encoded, labels)
    assert_array_equal(predict_batch(model, encoded, workers=3), predict_batch(model, encoded))
    assert_array_equal(predict_batch(model, list(encoded)), predict_batch(model, encoded))


def test_prediction_checks_lengths(toy):
    model = train_majority(*toy)
    with pytest.raises(EncodingError):
        predict(model, pack([1, -1]))


def test_accuracy_of_empty_test_set(toy):
    model = train_majority(*toy)
    assert isnan(accuracy(model, PackedBatch.stack([], N=N), []))


def test_model_validation():
    with pytest.raises(TrainingError):
        ClassModel('sgd_binary', [[1.0, -1.0]], 2)
    with pytest.raises(TrainingError):
        ClassModel('sgd_float', [1.0, 2.0], 2)
