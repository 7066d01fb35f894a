#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from numpy import arange, sort
from numpy.random import default_rng
from numpy.testing import assert_array_equal
import pytest

from laplace_hdc.core.exceptions import EncodingError, PermutationLayoutError
from laplace_hdc.core.permutations import (PermutationFamily, check_trace_orthogonal, gamma, largest_family,
                                           shift_image)

FAMILIES = (
    PermutationFamily.cyclic_1d(8, 16),
    PermutationFamily.cyclic_1d(5, 5),
    PermutationFamily.block_1d(4, 3),
    PermutationFamily.cyclic_2d(3, 4),
    PermutationFamily.cyclic_2d(3, 3),
    PermutationFamily.block_2d(2, 3),
)


@pytest.mark.parametrize('family', FAMILIES, ids=str)
def test_members_are_permutations(family):
    for f in range(family.d):
        assert_array_equal(sort(family.feature_sources(f)), arange(family.N))


@pytest.mark.parametrize('family', FAMILIES, ids=str)
def test_first_feature_is_identity(family):
    assert_array_equal(family.feature_sources(0), arange(family.N))


@pytest.mark.parametrize('family', FAMILIES, ids=str)
def test_inverse_undoes_apply(family):
    v = default_rng(0).integers(-1, 2, size=(3, family.N))
    index = family.feature_index(family.d - 1)
    assert_array_equal(family.inverse_apply(index, family.apply(index, v)), v)


@pytest.mark.parametrize('family', FAMILIES, ids=str)
def test_families_are_trace_orthogonal(family):
    assert check_trace_orthogonal(family)


@pytest.mark.parametrize('family', FAMILIES, ids=str)
def test_gamma_counts_agree(family):
    assert gamma(family) == gamma(family, method='support')


def test_gamma_of_cyclic_family():
    d, N = 5, 64
    assert gamma(PermutationFamily.cyclic_1d(d, N)) == (2 * d - 1) * N


def test_repeated_offsets_break_orthogonality():
    assert not check_trace_orthogonal(PermutationFamily.cyclic_1d(3, 8, offsets=[0, 2, 2]))


def test_cyclic_shift():
    family = PermutationFamily.cyclic_1d(3, 5)
    assert family.apply(2, [0, 1, 2, 3, 4]).tolist() == [2, 3, 4, 0, 1]


def test_block_shift_moves_whole_blocks():
    family = PermutationFamily.block_1d(3, 2)
    assert family.apply(1, [0, 1, 2, 3, 4, 5]).tolist() == [2, 3, 4, 5, 0, 1]


def test_two_dimensional_feature_index():
    family = PermutationFamily.block_2d(3, 1)
    assert family.feature_index(5) == (1, 2)
    assert family.grid_shape == (3, 3, 1)


def test_descriptor_round_trip():
    for family in FAMILIES:
        assert PermutationFamily.from_descriptor(family.descriptor) == family


@pytest.mark.parametrize('kind, d, N, side, copies', (
    ('cyclic1d', 10, 5, None, None),
    ('block1d', 4, 10, None, 3),
    ('cyclic2d', 9, 4, 3, 2),
    ('cyclic2d', 8, 16, 3, 4),
    ('block2d', 9, 20, 3, 2),
    ('spiral', 4, 4, None, None),
))
def test_layout_constraints(kind, d, N, side, copies):
    with pytest.raises(PermutationLayoutError):
        PermutationFamily(kind, d, N, side, copies)


def test_out_of_range_members():
    with pytest.raises(EncodingError):
        PermutationFamily.cyclic_1d(3, 8).shift(3)
    with pytest.raises(EncodingError):
        PermutationFamily.cyclic_2d(2, 3).shift(1)
    with pytest.raises(EncodingError):
        PermutationFamily.cyclic_1d(3, 8).apply(0, [1, 2, 3])


@pytest.mark.parametrize('kind, d, expected_N', (
    ('cyclic1d', 784, 10000),
    ('block1d', 784, 9408),
    ('cyclic2d', 784, 10000),
    ('block2d', 784, 9408),
    ('block2d', 441, 9702),
))
def test_largest_family(kind, d, expected_N):
    family = largest_family(kind, d)
    assert family.kind == kind
    assert family.d == d
    assert family.N == expected_N


def test_largest_family_respects_torus_side():
    assert largest_family('cyclic2d', 784, cyclic2d_side=50).N == 2500
    with pytest.raises(PermutationLayoutError):
        largest_family('cyclic2d', 784, cyclic2d_side=101)


@pytest.mark.parametrize('kind', ('cyclic2d', 'block2d'))
def test_largest_family_needs_square_inputs(kind):
    with pytest.raises(PermutationLayoutError):
        largest_family(kind, 10)


def test_support_counting_is_test_scale_only():
    with pytest.raises(PermutationLayoutError):
        gamma(PermutationFamily.cyclic_1d(2, 10000), method='support')


def test_shift_image_wraps_around():
    image = arange(9).reshape(3, 3)
    assert shift_image(image, 1, 0).tolist() == [[6, 7, 8], [0, 1, 2], [3, 4, 5]]
    assert_array_equal(shift_image(image.ravel(), -1, 2), shift_image(image, -1, 2).ravel())
