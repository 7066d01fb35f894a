#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from collections import namedtuple
from numpy import zeros, uint8
from numpy.random import default_rng
import pytest

from laplace_hdc.tools.dataio import write_idx

SIDE = 8

DigitFiles = namedtuple('DigitFiles', 'train_images train_labels test_images test_labels')


def two_class_images(count, seed):
    """Noisy 8x8 images, class 0 bright in the top half, class 1 in the bottom half"""
    rng = default_rng(seed)
    labels = (rng.permutation(count) % 2).astype(uint8)
    images = rng.integers(0, 40, size=(count, SIDE, SIDE)).astype(uint8)
    for i, label in enumerate(labels):
        rows = slice(0, SIDE // 2) if label == 0 else slice(SIDE // 2, SIDE)
        images[i, rows, :] += 200
    return images, labels


@pytest.fixture
def digit_files(tmp_path):
    """A two-class dataset of 40 training and 20 test images written as IDX files"""
    train_images, train_labels = two_class_images(40, seed=1)
    test_images, test_labels = two_class_images(20, seed=2)
    files = DigitFiles(*(tmp_path / name for name in DigitFiles._fields))
    write_idx(files.train_images, train_images)
    write_idx(files.train_labels, train_labels)
    write_idx(files.test_images, test_images)
    write_idx(files.test_labels, test_labels)
    return files


@pytest.fixture
def blank_images():
    return zeros((3, SIDE, SIDE), dtype=uint8)
