#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.tools.dataio
========================

Reading and writing of everything that leaves the process: MNIST-family IDX
files, trained model files, grayscale image exports, JSON configuration and
CSV results.

Model files are little-endian and laid out as
::

    b'LHDC'  u32 version  u32 length  JSON metadata
    u32 section count, then per section:
        u16 name length, name, u16 dtype length, dtype, u8 rank,
        u64 per dimension, u64 byte count, raw array bytes
"""

import gzip
import json
import struct
from collections import namedtuple
from logging import getLogger
from pathlib import Path
from numpy import asarray, dtype, frombuffer, full, int64, isin, prod, uint8

from laplace_hdc.core.encoder import PackedBatch
from laplace_hdc.core.exceptions import (CorruptModelError, CountMismatchError, DataFormatError, IdxMagicError,
                                         ModelVersionError, TruncatedFileError)
from laplace_hdc.core.utils import RESULTS_HEADER, round_half_up, write_csv
from laplace_hdc.learning.classifiers import ClassModel
from laplace_hdc.learning.features import ImageBatch, transform_from_state

_logger = getLogger(__name__)

MODEL_MAGIC = b'LHDC'
MODEL_VERSION = 1
IDX_UNSIGNED_BYTE = 0x08


class IdxHeader(namedtuple('IdxHeader', 'magic dims')):
    """Magic bytes and big-endian dimension sizes of an IDX file"""

    @property
    def rank(self):
        return self.magic[3]

    @property
    def size(self):
        return 4 + 4 * len(self.dims)


ModelFile = namedtuple('ModelFile', 'model transform')


def _read_bytes(path):
    path = Path(path)
    opener = gzip.open if path.suffix == '.gz' else open
    with opener(path, 'rb') as f:
        return f.read()


def parse_idx(raw, rank, name='IDX file'):
    """Header and unsigned byte payload of IDX content

    >>> header, data = parse_idx(bytes([0, 0, 8, 1, 0, 0, 0, 2, 7, 9]), rank=1)
    >>> header.dims, data.tolist()
    ((2,), [7, 9])
    """
    if len(raw) < 4:
        raise TruncatedFileError(f'{name}: {len(raw)} bytes cannot hold an IDX header')
    magic = raw[:4]
    if magic[0] != 0 or magic[1] != 0 or magic[2] != IDX_UNSIGNED_BYTE or magic[3] != rank:
        raise IdxMagicError(f'{name}: bad magic {magic.hex()}, expected 000008{rank:02x}')
    if len(raw) < 4 + 4 * rank:
        raise TruncatedFileError(f'{name}: header ends after {len(raw)} bytes')
    header = IdxHeader(magic, struct.unpack(f'>{rank}I', raw[4:4 + 4 * rank]))
    expected = int(prod(header.dims, dtype=int64))
    payload = len(raw) - header.size
    if payload < expected:
        raise TruncatedFileError(f'{name}: {payload} data bytes, header announces {expected}')
    if payload > expected:
        raise DataFormatError(f'{name}: {payload - expected} bytes past the announced data')
    return header, frombuffer(raw, dtype=uint8, offset=header.size).reshape(header.dims)


def load_idx(images_path, labels_path):
    """Images and class ids of an MNIST-family dataset

    Gzip-compressed files (``.gz``) are read transparently. Digit labels
    ``0..9`` become class ids ``1..10``.

    :param images_path: IDX file of rank 3
    :param labels_path: IDX file of rank 1
    :return: ``(ImageBatch, labels)``
    """
    _, pixels = parse_idx(_read_bytes(images_path), 3, str(images_path))
    _, labels = parse_idx(_read_bytes(labels_path), 1, str(labels_path))
    if pixels.shape[0] != labels.shape[0]:
        raise CountMismatchError(f'{pixels.shape[0]} images in {images_path} but '
                                 f'{labels.shape[0]} labels in {labels_path}')
    if pixels.shape[1] != pixels.shape[2]:
        raise DataFormatError(f'{images_path}: images of {pixels.shape[1]}x{pixels.shape[2]} pixels are not square')
    _logger.info(f'loaded {pixels.shape[0]} images of {pixels.shape[1]}x{pixels.shape[2]} from {images_path}')
    return ImageBatch(pixels), labels.astype(int64) + 1


def write_idx(path, array):
    """Write an unsigned byte array as IDX"""
    array = asarray(array, dtype=uint8)
    with open(path, 'wb') as f:
        f.write(bytes([0, 0, IDX_UNSIGNED_BYTE, array.ndim]))
        f.write(struct.pack(f'>{array.ndim}I', *array.shape))
        f.write(array.tobytes())


def _write_section(f, name, array):
    array = asarray(array)
    if array.dtype.byteorder == '>':
        array = array.astype(array.dtype.newbyteorder('<'))
    name = name.encode('utf-8')
    kind = array.dtype.str.encode('ascii')
    f.write(struct.pack('<H', len(name)) + name)
    f.write(struct.pack('<H', len(kind)) + kind)
    f.write(struct.pack('<B', array.ndim))
    f.write(struct.pack(f'<{array.ndim}Q', *array.shape))
    data = array.tobytes(order='C')
    f.write(struct.pack('<Q', len(data)))
    f.write(data)


def save_model(model, path, transform=None):
    """Persist a model, and optionally its fitted feature transform

    :param model: :class:`.classifiers.ClassModel`
    :param path: destination file
    :param transform: fitted feature transform of the training pipeline
    """
    meta = {'mode': model.mode, 'N': model.N, 'c': model.c, 'provenance': model.provenance}
    arrays = {'representatives': model.representatives.words if model.binary else model.representatives}
    if transform is not None:
        transform_meta, transform_arrays = transform.state()
        meta['features'] = {'name': transform.name, 'meta': transform_meta}
        arrays.update({f'features.{k}': v for k, v in transform_arrays.items()})
    payload = json.dumps(meta, sort_keys=True).encode('utf-8')
    with open(path, 'wb') as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack('<II', MODEL_VERSION, len(payload)))
        f.write(payload)
        f.write(struct.pack('<I', len(arrays)))
        for name, array in arrays.items():
            _write_section(f, name, array)
    _logger.info(f'saved {model.mode} model with {model.c} classes to {path}')


class _Reader:
    def __init__(self, raw, name):
        self.raw = raw
        self.name = name
        self.offset = 0

    def take(self, count):
        if self.offset + count > len(self.raw):
            raise CorruptModelError(f'{self.name}: payload ends after {len(self.raw)} bytes, '
                                    f'{self.offset + count} needed')
        chunk = self.raw[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def section(self):
        name = self.take(self.unpack('<H')[0]).decode('utf-8')
        try:
            kind = dtype(self.take(self.unpack('<H')[0]).decode('ascii'))
        except (TypeError, ValueError) as e:
            raise CorruptModelError(f'{self.name}: section {name} has an unknown dtype: {e}')
        if kind.hasobject or kind.itemsize == 0:
            raise CorruptModelError(f'{self.name}: section {name} has a non-numeric dtype {kind}')
        rank = self.unpack('<B')[0]
        shape = self.unpack(f'<{rank}Q')
        nbytes = self.unpack('<Q')[0]
        if nbytes != int(prod(shape, dtype=int64)) * kind.itemsize:
            raise CorruptModelError(f'{self.name}: section {name} of shape {shape} announces {nbytes} bytes')
        return name, frombuffer(self.take(nbytes), dtype=kind).reshape(shape).copy()


def read_model_file(path):
    """Model and feature transform stored by :func:`save_model`

    :rtype: ModelFile
    """
    reader = _Reader(_read_bytes(path), str(path))
    if reader.take(4) != MODEL_MAGIC:
        raise CorruptModelError(f'{path} is not a model file')
    version, length = reader.unpack('<II')
    if version != MODEL_VERSION:
        raise ModelVersionError(f'{path}: model format version {version}, this reader handles {MODEL_VERSION}')
    try:
        meta = json.loads(reader.take(length).decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptModelError(f'{path}: unreadable metadata: {e}')
    if not isinstance(meta, dict):
        raise CorruptModelError(f'{path}: metadata is not an object')
    arrays = dict(reader.section() for _ in range(reader.unpack('<I')[0]))
    if reader.offset != len(reader.raw):
        raise CorruptModelError(f'{path}: {len(reader.raw) - reader.offset} bytes past the last section')
    try:
        representatives = arrays['representatives']
        if meta['mode'] in ('majority_binary', 'sgd_binary'):
            representatives = PackedBatch(representatives, meta['N'])
        model = ClassModel(meta['mode'], representatives, meta['N'], meta['provenance'])
        classes = meta['c']
    except KeyError as e:
        raise CorruptModelError(f'{path}: missing {e}')
    if model.c != classes:
        raise CorruptModelError(f'{path}: {model.c} representatives stored for {classes} classes')
    transform = None
    if 'features' in meta:
        prefix = 'features.'
        transform = transform_from_state(meta['features']['name'], meta['features']['meta'],
                                         {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)})
    return ModelFile(model, transform)


def load_model(path):
    """:class:`.classifiers.ClassModel` stored by :func:`save_model`"""
    return read_model_file(path).model


def grid_to_gray(grid):
    """8-bit gray levels of a grid: ``+-1`` grids map ``-1`` to 0 and ``+1`` to 255,
    other grids are stretched linearly from their range onto 0..255

    >>> grid_to_gray([[-1, 1], [1, -1]]).tolist()
    [[0, 255], [255, 0]]
    >>> grid_to_gray([[0.0, 0.5], [0.25, 1.0]]).tolist()
    [[0, 128], [64, 255]]
    """
    grid = asarray(grid)
    if grid.ndim != 2:
        raise DataFormatError(f'images are exported from rectangular grids, got shape {grid.shape}')
    if isin(grid, (-1, 1)).all():
        return ((grid > 0) * 255).astype(uint8)
    grid = grid.astype(float)
    low, high = float(grid.min()), float(grid.max())
    if high == low:
        return full(grid.shape, 128, dtype=uint8)
    return round_half_up((grid - low) / (high - low) * 255).astype(uint8)


def export_image(grid, path, png=False):
    """Write a grid as a binary (P5) PGM file, optionally also rendered as PNG

    :param grid: 2D array of ``+-1`` values or reals
    :param path: destination ``.pgm`` file
    :param png: also write a ``.png`` next to it
    :return: path of the PGM file
    """
    gray = grid_to_gray(grid)
    path = Path(path)
    height, width = gray.shape
    with open(path, 'wb') as f:
        f.write(f'P5\n{width} {height}\n255\n'.encode('ascii'))
        f.write(gray.tobytes())
    if png:
        from laplace_hdc.tools.plots import save_gray_png
        save_gray_png(gray, path.with_suffix('.png'))
    return path


def read_pgm(path):
    """Gray levels of a binary PGM file written by :func:`export_image`"""
    raw = Path(path).read_bytes()
    tokens = []
    offset = 0
    while len(tokens) < 4:
        while offset < len(raw) and raw[offset:offset + 1].isspace():
            offset += 1
        if raw[offset:offset + 1] == b'#':
            offset = raw.index(b'\n', offset)
            continue
        end = offset
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        if end == offset:
            raise DataFormatError(f'{path}: incomplete PGM header')
        tokens.append(raw[offset:end])
        offset = end
    if tokens[0] != b'P5':
        raise DataFormatError(f'{path}: not a binary PGM file')
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise DataFormatError(f'{path}: only 8-bit PGM files are supported')
    data = raw[offset + 1:]
    if len(data) != width * height:
        raise DataFormatError(f'{path}: {len(data)} pixel bytes for a {width}x{height} image')
    return frombuffer(data, dtype=uint8).reshape(height, width)


def load_json(filename):
    with open(filename, 'r', encoding='utf-8') as f:
        data = json.load(f)
    return data


def save_json(obj, filename):
    with open(filename, 'w', encoding='utf-8') as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)


def write_results(rows, filename, append=True):
    """Append result rows under the ``run,seed,dataset,encoder,classifier,accuracy,runtime_s`` header"""
    write_csv(rows, RESULTS_HEADER, filename, append=append)
