#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from numpy import array, diag, eye, nan
from numpy.testing import assert_allclose, assert_array_equal
import pytest

from laplace_hdc.core.exceptions import ConfigurationError, EigenSolverError
from laplace_hdc.core.numerics import (GAUSSIAN_BLOCK_ROWS, gaussian_block, gaussian_matrix, psd_factor,
                                       psd_projection, sym_eigen)


def test_gaussian_matrix_is_a_function_of_its_seed():
    a = gaussian_matrix(10, 3, seed=42)
    assert a.shape == (10, 3)
    assert_array_equal(a, gaussian_matrix(10, 3, seed=42))
    assert not (a == gaussian_matrix(10, 3, seed=43)).all()


def test_gaussian_matrix_is_standard_normal():
    g = gaussian_matrix(10000, 1, seed=1)
    assert g.shape == (10000, 1)
    assert abs(g.mean()) <= 0.05
    assert 0.9 <= g.var() <= 1.1


def test_gaussian_blocks_are_independent():
    rows = GAUSSIAN_BLOCK_ROWS + 5
    a = gaussian_matrix(rows, 2, seed=7)
    assert_array_equal(a[GAUSSIAN_BLOCK_ROWS:], gaussian_block(1, rows, 2, seed=7))


@pytest.mark.parametrize('rows, cols', ((0, 3), (3, 0), (-1, 2)))
def test_gaussian_matrix_rejects_empty_shapes(rows, cols):
    with pytest.raises(ConfigurationError):
        gaussian_matrix(rows, cols, seed=0)


def test_sym_eigen_orders_and_reconstructs():
    a = array([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]])
    e = sym_eigen(a)
    assert_allclose(e.eigenvalues, [5.0, 3.0, 1.0])
    assert_allclose(e.reconstruct(), a, atol=1e-12)
    assert_allclose(e.eigenvectors.T @ e.eigenvectors, eye(3), atol=1e-12)


@pytest.mark.parametrize('matrix', (
    [[1.0, 2.0], [0.0, 1.0]],
    [[1.0, nan], [nan, 1.0]],
    [[1.0, 2.0, 3.0]],
))
def test_sym_eigen_rejects_bad_input(matrix):
    with pytest.raises(EigenSolverError):
        sym_eigen(matrix)


def test_psd_factor_of_psd_matrix():
    w = array([[1.0, 0.5], [0.5, 1.0]])
    f = psd_factor(w)
    assert_allclose(f.T @ f, w, atol=1e-12)


def test_psd_projection_zeroes_negative_modes():
    w = array([[1.0, 2.0], [2.0, 1.0]])
    p = psd_projection(w)
    assert sym_eigen(p).min_eigenvalue >= -1e-12
    assert_allclose(p, [[1.5, 1.5], [1.5, 1.5]], atol=1e-12)


def test_psd_factor_of_diagonal():
    f = psd_factor(diag([4.0, 0.0]))
    assert_allclose(f.T @ f, [[4.0, 0.0], [0.0, 0.0]], atol=1e-12)
    assert_allclose(abs(f).sum(), 2.0)
