#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import gzip
import json
import struct
from csv import reader
from numpy import arange, array, uint8
from numpy.random import default_rng
from numpy.testing import assert_array_equal
import pytest

from laplace_hdc.core.encoder import pack
from laplace_hdc.core.exceptions import (CorruptModelError, CountMismatchError, DataFormatError, IdxMagicError,
                                         ModelVersionError, TruncatedFileError)
from laplace_hdc.learning.classifiers import ClassModel
from laplace_hdc.learning.features import HaarFilterBank, HaarTransform, ImageBatch
from laplace_hdc.tools.dataio import (export_image, load_idx, load_model, parse_idx, read_model_file, read_pgm,
                                      save_model, write_idx, write_results)


def test_load_idx_shifts_labels(digit_files):
    images, labels = load_idx(digit_files.train_images, digit_files.train_labels)
    assert images.count == 40
    assert images.side == 8
    assert set(labels.tolist()) == {1, 2}


def test_load_gzip_idx(tmp_path):
    pixels = arange(2 * 3 * 3, dtype=uint8).reshape(2, 3, 3)
    write_idx(tmp_path / 'images', pixels)
    write_idx(tmp_path / 'labels', [0, 9])
    for name in ('images', 'labels'):
        with gzip.open(tmp_path / f'{name}.gz', 'wb') as f:
            f.write((tmp_path / name).read_bytes())
    images, labels = load_idx(tmp_path / 'images.gz', tmp_path / 'labels.gz')
    assert_array_equal(images.pixels, pixels)
    assert labels.tolist() == [1, 10]


@pytest.mark.parametrize('raw, rank, error', (
    (bytes([0, 0, 9, 1, 0, 0, 0, 1, 5]), 1, IdxMagicError),
    (bytes([0, 0, 8, 1, 0, 0, 0, 1, 5]), 3, IdxMagicError),
    (bytes([0, 0, 8]), 1, TruncatedFileError),
    (bytes([0, 0, 8, 1, 0, 0]), 1, TruncatedFileError),
    (bytes([0, 0, 8, 1, 0, 0, 0, 3, 5]), 1, TruncatedFileError),
))
def test_parse_idx_errors(raw, rank, error):
    with pytest.raises(error):
        parse_idx(raw, rank)


def test_parse_idx_rejects_trailing_bytes():
    with pytest.raises(DataFormatError) as e:
        parse_idx(bytes([0, 0, 8, 1, 0, 0, 0, 1, 5, 6]), 1)
    assert e.type is DataFormatError


def test_image_and_label_counts_must_agree(tmp_path):
    write_idx(tmp_path / 'images', arange(2 * 4, dtype=uint8).reshape(2, 2, 2))
    write_idx(tmp_path / 'labels', [1, 2, 3])
    with pytest.raises(CountMismatchError):
        load_idx(tmp_path / 'images', tmp_path / 'labels')


def test_binary_model_round_trip(tmp_path):
    reps = pack(default_rng(0).choice([-1, 1], size=(3, 100)))
    model = ClassModel('majority_binary', reps, 100, {'run': 2, 'encoder': {'N': 100}})
    save_model(model, tmp_path / 'model.lhdc')
    loaded = load_model(tmp_path / 'model.lhdc')
    assert loaded.mode == 'majority_binary'
    assert loaded.representatives == reps
    assert loaded.provenance == {'run': 2, 'encoder': {'N': 100}}


def test_float_model_round_trip_with_transform(tmp_path):
    weights = default_rng(1).standard_normal((4, 70))
    images = ImageBatch(default_rng(2).integers(0, 256, size=(5, 8, 8)))
    transform = HaarTransform.fit(images, HaarFilterBank(stride=2))
    save_model(ClassModel('sgd_float', weights, 70), tmp_path / 'model.lhdc', transform)
    stored = read_model_file(tmp_path / 'model.lhdc')
    assert_array_equal(stored.model.representatives, weights)
    assert stored.transform.name == 'haar'
    assert_array_equal(stored.transform.apply(images).values, transform.apply(images).values)


@pytest.fixture
def model_bytes(tmp_path):
    save_model(ClassModel('majority_float', [[0.5, -0.5]], 2), tmp_path / 'model.lhdc')
    return (tmp_path / 'model.lhdc').read_bytes()


@pytest.mark.parametrize('corrupt, error', (
    (lambda raw: b'XXXX' + raw[4:], CorruptModelError),
    (lambda raw: raw[:4] + struct.pack('<I', 2) + raw[8:], ModelVersionError),
    (lambda raw: raw[:-3], CorruptModelError),
    (lambda raw: raw + b'\0', CorruptModelError),
))
def test_corrupt_model_files(tmp_path, model_bytes, corrupt, error):
    (tmp_path / 'broken.lhdc').write_bytes(corrupt(model_bytes))
    with pytest.raises(error):
        load_model(tmp_path / 'broken.lhdc')


def model_file_bytes(meta, sections):
    payload = json.dumps(meta).encode('utf-8')
    raw = b'LHDC' + struct.pack('<II', 1, len(payload)) + payload + struct.pack('<I', len(sections))
    for name, kind, shape, data in sections:
        raw += struct.pack('<H', len(name)) + name.encode('utf-8')
        raw += struct.pack('<H', len(kind)) + kind.encode('ascii')
        raw += struct.pack(f'<B{len(shape)}Q', len(shape), *shape) + struct.pack('<Q', len(data)) + data
    return raw


FLOAT_META = {'mode': 'majority_float', 'N': 2, 'c': 1, 'provenance': {}}
FLOAT_SECTION = ('representatives', '<f8', (1, 2), struct.pack('<2d', 0.5, -0.5))


def test_hand_built_model_file(tmp_path):
    (tmp_path / 'model.lhdc').write_bytes(model_file_bytes(FLOAT_META, [FLOAT_SECTION]))
    assert_array_equal(load_model(tmp_path / 'model.lhdc').representatives, [[0.5, -0.5]])


@pytest.mark.parametrize('meta, sections', (
    ({k: v for k, v in FLOAT_META.items() if k != 'c'}, [FLOAT_SECTION]),
    ([FLOAT_META], [FLOAT_SECTION]),
    (FLOAT_META, [('representatives', '|O', (1, 2), bytes(16))]),
    (FLOAT_META, [('representatives', '|V0', (1, 2), b'')]),
    (FLOAT_META, [('representatives', 'not-a-dtype', (1, 2), bytes(16))]),
))
def test_malformed_model_contents(tmp_path, meta, sections):
    (tmp_path / 'model.lhdc').write_bytes(model_file_bytes(meta, sections))
    with pytest.raises(CorruptModelError):
        load_model(tmp_path / 'model.lhdc')


def test_export_sign_grid(tmp_path):
    grid = array([[1, -1, 1], [-1, -1, 1]])
    path = export_image(grid, tmp_path / 'signs.pgm')
    assert read_pgm(path).tolist() == [[255, 0, 255], [0, 0, 255]]


def test_export_float_grid_with_png(tmp_path):
    grid = array([[0.0, 0.5], [0.25, 1.0]])
    path = export_image(grid, tmp_path / 'average.pgm', png=True)
    assert read_pgm(path).tolist() == [[0, 128], [64, 255]]
    assert (tmp_path / 'average.png').is_file()


def test_export_constant_grid(tmp_path):
    assert read_pgm(export_image(array([[0.3, 0.3]]), tmp_path / 'flat.pgm')).tolist() == [[128, 128]]


def test_write_results_keeps_one_header(tmp_path):
    path = tmp_path / 'results.csv'
    write_results([(0, 1, 'mnist', 'raw-cyclic1d-N100', 'sgd_float', '0.5', '')], path, append=False)
    write_results([(1, 2, 'mnist', 'raw-cyclic1d-N100', 'sgd_float', '0.6', '')], path)
    with open(path, newline='') as f:
        rows = list(reader(f))
    assert rows[0] == ['run', 'seed', 'dataset', 'encoder', 'classifier', 'accuracy', 'runtime_s']
    assert [r[0] for r in rows[1:]] == ['0', '1']
