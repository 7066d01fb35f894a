#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.utils
======================

This module contains utility functions that are used with laplace_hdc.
"""

from csv import writer
from pathlib import Path
from numpy import asarray, floor, uint64
from numpy.random import SeedSequence

from laplace_hdc.core.exceptions import ConfigurationError


RESULTS_HEADER = ('run', 'seed', 'dataset', 'encoder', 'classifier', 'accuracy', 'runtime_s')


def write_csv(rows, header, filename, append=False):
    """Write rows of values to a CSV file

    The header row is written when the file is created, so appending to an
    existing results file keeps a single header:
    ::

        run,seed,dataset,encoder,classifier,accuracy,runtime_s
        0,1234,mnist,raw-cyclic1d-N10000,sgd_float,0.954600,81.2
        1,5678,mnist,raw-cyclic1d-N10000,sgd_float,0.951200,80.7

    :param rows: iterable of sequences, one per line
    :param header: column names
    :param filename: destination path
    :param append: add to an existing file instead of overwriting it
    """
    filename = Path(filename)
    fresh = not append or not filename.exists() or filename.stat().st_size == 0
    with open(filename, 'a' if append else 'w', encoding='utf-8', newline='') as f:
        w = writer(f, lineterminator='\n')
        if fresh:
            w.writerow(header)
        for row in rows:
            w.writerow(row)


def derive_seed(seed, *keys):
    """Derive an independent 64-bit seed from a master seed and integer keys

    Derived seeds depend only on their arguments, so work split across
    repetitions, trials or threads stays reproducible.

    >>> derive_seed(7, 3) == derive_seed(7, 3)
    True
    >>> derive_seed(7, 3) == derive_seed(7, 4)
    False
    >>> 0 <= derive_seed(0) < 2 ** 64
    True
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    return int(SeedSequence(entropy).generate_state(1, dtype=uint64)[0])


def round_half_up(values):
    """Round to the nearest integer, halves going up

    >>> round_half_up([0.5, 1.5, 2.49, -0.5])
    array([1., 2., 2., 0.])
    """
    return floor(asarray(values, dtype=float) + 0.5)


def words_for(bits):
    """How many 64-bit words hold a given number of bits

    >>> words_for(64)
    1
    >>> words_for(65)
    2
    >>> words_for(10000)
    157
    """
    return (bits + 63) // 64


def require_positive(name, value):
    """Reject non-positive sizes

    >>> require_positive('N', 3)
    3
    >>> require_positive('N', 0)
    Traceback (most recent call last):
        ...
    laplace_hdc.core.exceptions.ConfigurationError: N must be a positive integer, got 0
    """
    if int(value) != value or value < 1:
        raise ConfigurationError(f'{name} must be a positive integer, got {value}')
    return int(value)
