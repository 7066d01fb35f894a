#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.core.parameters
===========================

This module contains the parameters of an experiment run.
"""

from pathlib import Path

from laplace_hdc.core.exceptions import ParametersError
from laplace_hdc.core.kernel import EXPONENT_CONVENTIONS
from laplace_hdc.core.permutations import KINDS

FEATURE_MODES = ('raw', 'svd', 'haar')
CLASSIFIER_MODES = ('majority_binary', 'majority_float', 'sgd_float', 'sgd_binary')
CLAMP_MODES = ('step', 'epoch')
PATH_KEYS = ('train_images', 'train_labels', 'test_images', 'test_labels')

DEFAULTS = {
    'train_images': None,
    'train_labels': None,
    'test_images': None,
    'test_labels': None,
    'dataset': 'mnist',
    'model_path': None,
    'output_dir': 'results',
    'n_cap': 10000,
    'feature_mode': 'raw',
    'stride': 4,
    'svd_rank': None,
    'kind': 'cyclic1d',
    'cyclic2d_side': None,
    'classifier': 'sgd_float',
    'c': None,
    'alpha': 1.0,
    'bandwidth_samples': 1000,
    'kernel_exponent_convention': 'lambda_squared',
    'epochs': 3,
    'lr': 0.01,
    'batch_size': 64,
    'clamp': 'step',
    'repetitions': 5,
    'seed': 0,
    'workers': 1,
    'train_limit': None,
    'omit_runtime': False,
    'flip_ratios': (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5),
    'sample_ids': None,
    'png': False,
    'trials': 200,
    'bench_samples': 1000,
}

_POSITIVE = ('n_cap', 'stride', 'epochs', 'batch_size', 'repetitions', 'workers', 'trials',
             'bench_samples')
_OPTIONAL_POSITIVE = ('svd_rank', 'train_limit', 'bandwidth_samples', 'cyclic2d_side')


def flatten_config(config, prefix=''):
    """Flatten nested config objects, joining keys with ``_``

    >>> flatten_config({'kernel': {'exponent_convention': 'lambda'}, 'n-cap': 100})
    {'kernel_exponent_convention': 'lambda', 'n_cap': 100}
    """
    flat = {}
    for key, value in config.items():
        key = prefix + key.replace('-', '_')
        if isinstance(value, dict):
            flat.update(flatten_config(value, key + '_'))
        else:
            flat[key] = value
    return flat


class Parameters:
    def asdict(self):
        class_dict = self.__class__.__dict__
        instance_dict = self.__dict__
        new_dict = {}
        for key in class_dict:
            if isinstance(class_dict[key], property) and '_' + key in instance_dict:
                new_dict[key] = instance_dict['_' + key]
        return new_dict


class RunConfig(Parameters):
    """Settings of one experiment, defaults overridden by keyword arguments

    Unknown keys are rejected so that typos in config files do not go unnoticed.
    """

    def __init__(self, **kwargs):
        unknown = set(kwargs) - set(DEFAULTS)
        if unknown:
            raise ParametersError(f'Unknown run configuration keys: {", ".join(sorted(unknown))}')
        values = {**DEFAULTS, **{k: v for k, v in kwargs.items() if v is not None}}
        try:
            for key in _POSITIVE:
                values[key] = self._positive_int(key, values[key])
            for key in _OPTIONAL_POSITIVE:
                if values[key] is not None:
                    values[key] = self._positive_int(key, values[key])
            values['seed'] = int(values['seed'])
            values['alpha'] = float(values['alpha'])
            values['lr'] = float(values['lr'])
            if values['c'] is not None:
                values['c'] = float(values['c'])
            values['flip_ratios'] = tuple(float(r) for r in values['flip_ratios'])
            if values['sample_ids'] is not None:
                values['sample_ids'] = tuple(int(i) for i in values['sample_ids'])
        except (TypeError, ValueError) as e:
            raise ParametersError(f'Run configuration has a malformed value: {e}')
        self._check_choice('feature_mode', values['feature_mode'], FEATURE_MODES)
        self._check_choice('kind', values['kind'], KINDS)
        self._check_choice('classifier', values['classifier'], CLASSIFIER_MODES)
        self._check_choice('clamp', values['clamp'], CLAMP_MODES)
        self._check_choice('kernel_exponent_convention', values['kernel_exponent_convention'], EXPONENT_CONVENTIONS)
        if not 0 < values['alpha'] <= 1:
            raise ParametersError(f'alpha must lie in (0, 1], got {values["alpha"]}')
        if any(not 0 <= r <= 0.5 for r in values['flip_ratios']):
            raise ParametersError(f'flip ratios must lie in [0, 0.5], got {values["flip_ratios"]}')
        for key, value in values.items():
            setattr(self, '_' + key, value)

    @staticmethod
    def _positive_int(key, value):
        if int(value) != value or value < 1:
            raise ParametersError(f'{key} must be a positive integer, got {value}')
        return int(value)

    @staticmethod
    def _check_choice(key, value, choices):
        if value not in choices:
            raise ParametersError(f'{key} must be one of {choices}, got "{value}"')

    @classmethod
    def from_sources(cls, file_config=None, overrides=None):
        """Defaults, then a (nested) config file mapping, then explicit overrides"""
        merged = flatten_config(file_config or {})
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls(**merged)

    def replace(self, **kwargs):
        return RunConfig(**{**self.asdict(), **kwargs})

    def check_paths(self, *keys):
        """Fail on dataset paths that are unset or do not exist"""
        for key in keys or PATH_KEYS:
            value = getattr(self, key)
            if value is None:
                raise ParametersError(f'--{key.replace("_", "-")} is required')
            if not Path(value).is_file():
                raise ParametersError(f'{key.replace("_", " ")} file "{value}" does not exist')

    @property
    def train_images(self):
        return self._train_images

    @property
    def train_labels(self):
        return self._train_labels

    @property
    def test_images(self):
        return self._test_images

    @property
    def test_labels(self):
        return self._test_labels

    @property
    def dataset(self):
        return self._dataset

    @property
    def model_path(self):
        return self._model_path

    @property
    def output_dir(self):
        return self._output_dir

    @property
    def n_cap(self):
        return self._n_cap

    @property
    def feature_mode(self):
        return self._feature_mode

    @property
    def stride(self):
        return self._stride

    @property
    def svd_rank(self):
        return self._svd_rank

    @property
    def kind(self):
        return self._kind

    @property
    def cyclic2d_side(self):
        return self._cyclic2d_side

    @property
    def classifier(self):
        return self._classifier

    @property
    def c(self):
        return self._c

    @property
    def bandwidth_constant(self):
        """``c`` of the bandwidth rule: 4 for the binary SGD classifier unless set, 1 otherwise"""
        if self._c is not None:
            return self._c
        return 4.0 if self._classifier == 'sgd_binary' else 1.0

    @property
    def alpha(self):
        return self._alpha

    @property
    def bandwidth_samples(self):
        return self._bandwidth_samples

    @property
    def kernel_exponent_convention(self):
        return self._kernel_exponent_convention

    @property
    def epochs(self):
        return self._epochs

    @property
    def lr(self):
        return self._lr

    @property
    def batch_size(self):
        return self._batch_size

    @property
    def clamp(self):
        return self._clamp

    @property
    def repetitions(self):
        return self._repetitions

    @property
    def seed(self):
        return self._seed

    @property
    def workers(self):
        return self._workers

    @property
    def train_limit(self):
        return self._train_limit

    @property
    def omit_runtime(self):
        return self._omit_runtime

    @property
    def flip_ratios(self):
        return self._flip_ratios

    @property
    def sample_ids(self):
        return self._sample_ids

    @property
    def encoder_name(self):
        """Short label of the feature mode and family used in result tables"""
        return f'{self._feature_mode}-{self._kind}'

    @property
    def png(self):
        return self._png

    @property
    def trials(self):
        return self._trials

    @property
    def bench_samples(self):
        return self._bench_samples
