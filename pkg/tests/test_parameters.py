#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import pytest

from laplace_hdc.core.exceptions import ParametersError
from laplace_hdc.core.parameters import DEFAULTS, RunConfig
from laplace_hdc.core.permutations import largest_family


def test_defaults():
    config = RunConfig()
    assert config.asdict() == {k: (tuple(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items()}
    assert config.n_cap == 10000
    assert config.kind == 'cyclic1d'
    assert config.encoder_name == 'raw-cyclic1d'


@pytest.mark.parametrize('classifier, c, expected', (
    ('sgd_binary', None, 4.0),
    ('sgd_float', None, 1.0),
    ('majority_binary', None, 1.0),
    ('sgd_binary', 2.5, 2.5),
))
def test_bandwidth_constant(classifier, c, expected):
    assert RunConfig(classifier=classifier, c=c).bandwidth_constant == expected


def test_file_config_is_overridden_by_flags():
    file_config = {'kernel': {'exponent_convention': 'lambda'}, 'n-cap': 2048, 'seed': 7}
    config = RunConfig.from_sources(file_config, {'seed': 9, 'kind': None})
    assert config.kernel_exponent_convention == 'lambda'
    assert config.n_cap == 2048
    assert config.seed == 9
    assert config.kind == 'cyclic1d'


def test_replace_keeps_other_values():
    config = RunConfig(epochs=7).replace(lr=0.5)
    assert config.epochs == 7
    assert config.lr == 0.5


@pytest.mark.parametrize('kwargs', (
    {'unknown_option': 1},
    {'alpha': 0.0},
    {'alpha': 1.2},
    {'n_cap': 0},
    {'workers': 1.5},
    {'repetitions': 'five'},
    {'feature_mode': 'pca'},
    {'kind': 'spiral'},
    {'classifier': 'knn'},
    {'clamp': 'never'},
    {'kernel_exponent_convention': 'sigma'},
    {'flip_ratios': [0.1, 0.6]},
    {'svd_rank': 0},
))
def test_invalid_settings(kwargs):
    with pytest.raises(ParametersError):
        RunConfig(**kwargs)


def test_check_paths(tmp_path):
    present = tmp_path / 'images'
    present.write_bytes(b'')
    config = RunConfig(train_images=str(present), train_labels=str(tmp_path / 'missing'))
    config.check_paths('train_images')
    with pytest.raises(ParametersError, match='does not exist'):
        config.check_paths('train_images', 'train_labels')
    with pytest.raises(ParametersError, match='--test-images is required'):
        config.check_paths('test_images')


@pytest.mark.parametrize('n_cap, side', ((10000, 100), (4096, 64), (1000, 31)))
def test_cyclic_torus_side_follows_the_cap(n_cap, side):
    config = RunConfig(kind='cyclic2d', n_cap=n_cap)
    assert config.cyclic2d_side is None
    family = largest_family(config.kind, 784, config.n_cap, config.cyclic2d_side)
    assert family.copies == side
    assert family.N == side * side


def test_explicit_cyclic_torus_side():
    assert RunConfig(cyclic2d_side=40).cyclic2d_side == 40
    with pytest.raises(ParametersError):
        RunConfig(cyclic2d_side=0)
