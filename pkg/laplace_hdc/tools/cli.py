#!/usr/bin/env python3
# -*- coding: utf-8 -*-

'''
laplace_hdc.tools.cli
=====================

Command line entry points of the experiments

Every subcommand accepts an optional JSON config file whose keys are the
long option names; options given on the command line take precedence.
Exit codes: 0 on success, 1 when a stage fails, 2 on configuration errors.
'''

import argparse
import json
import logging
import sys
from pathlib import Path

import laplace_hdc.core.ansi_escapes as ansi_escapes
from laplace_hdc.core.exceptions import ConfigurationError, StageError
from laplace_hdc.core.parameters import (CLAMP_MODES, CLASSIFIER_MODES, DEFAULTS, FEATURE_MODES, RunConfig,
                                         flatten_config)
from laplace_hdc.core.permutations import KINDS
from laplace_hdc.tools.dataio import load_json
from laplace_hdc.tools.experiments import (run_bench, run_eval, run_pipeline, run_robustness, run_verify,
                                           run_visualize)
from laplace_hdc.tools.verify import all_passed

_logger = logging.getLogger(__name__)
_help_footer = '''
Datasets are read from local IDX files (optionally gzip-compressed), as
distributed for MNIST and Fashion-MNIST.

'''
_help_fname_json = 'FILE.json'
_help_fname_idx = 'FILE.idx'


def _setup_logging(args):
    logging.basicConfig(level={2: logging.DEBUG, 1: logging.INFO, 0: logging.CRITICAL}.get(args.verbose, logging.DEBUG))


def _add_common_options(parser: argparse.ArgumentParser):
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Increase verbosity (can be specified several times)')
    parser.add_argument('--config', type=Path, metavar=_help_fname_json,
                        help='Run configuration; command line options take precedence')
    parser.add_argument('-o', '--output-dir', type=Path, help='Directory receiving results, models and images')
    parser.add_argument('--seed', type=int, help='Master seed of all random draws')
    parser.add_argument('--workers', type=int, help='Threads used for hypervector generation and encoding')
    parser.add_argument('--omit-runtime', action='store_true', default=None,
                        help='Leave the runtime column empty so that re-runs give identical CSV files')


def _add_dataset_options(parser: argparse.ArgumentParser, train=True):
    parser.add_argument('--dataset', help='Dataset name written to the results')
    if train:
        parser.add_argument('--train-images', type=Path, metavar=_help_fname_idx, help='Training images')
        parser.add_argument('--train-labels', type=Path, metavar=_help_fname_idx, help='Training labels')
    parser.add_argument('--test-images', type=Path, metavar=_help_fname_idx, help='Test images')
    parser.add_argument('--test-labels', type=Path, metavar=_help_fname_idx, help='Test labels')


def _add_encoder_options(parser: argparse.ArgumentParser):
    parser.add_argument('--feature-mode', choices=FEATURE_MODES, help='Feature pipeline')
    parser.add_argument('--stride', type=int, help='Stride of the Haar filters')
    parser.add_argument('--svd-rank', type=int, help='Number of SVD directions kept (all by default)')
    parser.add_argument('--kind', choices=KINDS, help='Permutation family')
    parser.add_argument('--n-cap', type=int, help='Largest admissible hyperdimension')
    parser.add_argument('--cyclic2d-side', type=int, help='Side of the cyclic2d torus')
    parser.add_argument('--alpha', type=float, help='Kernel smoothness exponent in (0, 1]')
    parser.add_argument('-c', '--c', type=float, help='Bandwidth constant (4 for sgd_binary, 1 otherwise)')
    parser.add_argument('--bandwidth-samples', type=int, help='Vectors drawn for the median distance')
    parser.add_argument('--kernel-exponent-convention', choices=('lambda_squared', 'lambda'),
                        help='Whether the kernel exponent scales with lambda squared or lambda')


def _add_training_options(parser: argparse.ArgumentParser):
    parser.add_argument('--classifier', choices=CLASSIFIER_MODES, help='Classifier')
    parser.add_argument('--epochs', type=int, help='SGD epochs')
    parser.add_argument('--lr', type=float, help='SGD learning rate')
    parser.add_argument('--batch-size', type=int, help='SGD batch size')
    parser.add_argument('--clamp', choices=CLAMP_MODES, help='When binary SGD clamps its weights')
    parser.add_argument('--repetitions', type=int, help='Repetitions with derived seeds')
    parser.add_argument('--train-limit', type=int, help='Train on the first samples only')


def _parser(description):
    return argparse.ArgumentParser(description=description, epilog=_help_footer,
                                   formatter_class=argparse.ArgumentDefaultsHelpFormatter)


def _load_config(args, command_defaults=None):
    """RunConfig from defaults, the config file and the flags given

    ``command_defaults`` replace the package defaults for this command only; the
    config file and explicit flags still win over them.
    """
    try:
        file_config = load_json(args.config) if args.config is not None else {}
    except (OSError, json.JSONDecodeError) as e:
        print(f'{ansi_escapes.failure("Configuration error:")} cannot read {args.config}: {e}')
        sys.exit(2)
    if not isinstance(file_config, dict):
        print(f'{ansi_escapes.failure("Configuration error:")} {args.config} must hold a JSON object')
        sys.exit(2)
    overrides = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k in DEFAULTS}
    from_file = flatten_config(file_config)
    for key, value in (command_defaults or {}).items():
        if overrides.get(key) is None and key not in from_file:
            overrides[key] = value
    try:
        return RunConfig.from_sources(file_config, overrides)
    except ConfigurationError as e:
        print(f'{ansi_escapes.failure("Configuration error:")} {e}')
        sys.exit(2)


def _run(function, *args, **kwargs):
    try:
        return function(*args, **kwargs)
    except ConfigurationError as e:
        print(f'{ansi_escapes.failure("Configuration error:")} {e}')
        sys.exit(2)
    except StageError as e:
        print(f'{ansi_escapes.failure(f"Failure in stage {e.stage}:")} {e.error}')
        sys.exit(1)


def train_main(args=None):
    parser = _parser('Train and evaluate hyperdimensional classifiers, one CSV row per repetition')
    _add_common_options(parser)
    _add_dataset_options(parser)
    _add_encoder_options(parser)
    _add_training_options(parser)
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args)

    print(ansi_escapes.heading(f'Training {config.classifier} on {config.dataset} '
                               f'({config.encoder_name}, {config.repetitions} repetitions)'))
    repetitions = _run(run_pipeline, config)
    for rep in repetitions:
        print(f'  run {rep.run}: accuracy {ansi_escapes.value(f"{rep.accuracy * 100:.2f} %")}'
              f' (N={rep.encoder.N})')
    mean = sum(r.accuracy for r in repetitions) / len(repetitions)
    print(f'Mean accuracy: {ansi_escapes.value(f"{mean * 100:.2f} %")}')
    print(ansi_escapes.heading(f'Results and models saved to {config.output_dir}'))


def eval_main(args=None):
    parser = _parser('Evaluate a saved model on a test set')
    _add_common_options(parser)
    _add_dataset_options(parser, train=False)
    parser.add_argument('model_path', type=Path, metavar='MODEL.lhdc', help='Model written by lhdc-train')
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args)

    acc = _run(run_eval, config)
    print(f'Accuracy of {config.model_path}: {ansi_escapes.value(f"{acc * 100:.2f} %")}')


def robustness_main(args=None):
    parser = _parser('Accuracy of trained classifiers when a ratio of the test encoding bits is flipped')
    _add_common_options(parser)
    _add_dataset_options(parser)
    _add_encoder_options(parser)
    _add_training_options(parser)
    parser.add_argument('--flip-ratios', type=float, nargs='+', help='Ratios of flipped bits in [0, 0.5]')
    parser.add_argument('--png', action='store_true', default=None, help='Also plot the accuracy curve')
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args)

    print(ansi_escapes.heading(f'Robustness of {config.classifier} on {config.dataset}'))
    summary = _run(run_robustness, config)
    for ratio, row in summary.iterrows():
        accuracy = ansi_escapes.value(f'{row["mean"] * 100:.2f} %')
        print(f'  {ratio * 100:5.1f} % flipped: accuracy {accuracy}')
    print(ansi_escapes.heading(f'Curve saved to {config.output_dir}'))


def visualize_main(args=None):
    parser = _parser('Export encodings relative to the blank image as grayscale images')
    _add_common_options(parser)
    _add_dataset_options(parser)
    _add_encoder_options(parser)
    parser.add_argument('--sample-ids', type=int, nargs='+', help='Test samples to export (one per class by default)')
    parser.add_argument('--shift', type=int, nargs=2, metavar=('DI', 'DJ'),
                        help='Also export every sample translated by this many pixels')
    parser.add_argument('--png', action='store_true', default=None, help='Also write PNG files')
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args, {'kind': 'cyclic2d'})

    paths = _run(run_visualize, config, shift=tuple(args.shift) if args.shift else None)
    print(ansi_escapes.heading(f'{len(paths)} images saved to {config.output_dir}'))


def verify_main(args=None):
    parser = _parser('Check the encoder numerically against its analytic guarantees')
    _add_common_options(parser)
    parser.add_argument('--trials', type=int, help='Hypervector redraws of the similarity checks')
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args)

    rows = _run(run_verify, config)
    width = max(len(r.criterion) for r in rows)
    for r in rows:
        verdict = ansi_escapes.passed('pass') if r.passed == 'true' else ansi_escapes.failure('FAIL')
        print(f'  {r.criterion:<{width}}  predicted {r.predicted:<14} observed {r.observed:<14} {verdict}')
    if not all_passed(rows):
        print(ansi_escapes.failure('Verification failed'))
        sys.exit(1)
    print(ansi_escapes.heading(f'Report saved to {Path(config.output_dir) / "verification.csv"}'))


def bench_main(args=None):
    parser = _parser('Measure encoding throughput')
    _add_common_options(parser)
    _add_dataset_options(parser, train=False)
    _add_encoder_options(parser)
    parser.add_argument('--bench-samples', type=int, help='Number of samples encoded')
    args = parser.parse_args(args if args is not None else sys.argv[1:])
    _setup_logging(args)
    config = _load_config(args)

    rate = _run(run_bench, config)
    print(f'Encoding throughput: {ansi_escapes.value(f"{rate:.1f} samples/s")}'
          f' ({config.workers} workers)')


SUBCOMMANDS = {
    'train': train_main,
    'eval': eval_main,
    'robustness': robustness_main,
    'visualize': visualize_main,
    'verify': verify_main,
    'bench': bench_main,
}


def main(args=None):
    args = list(args if args is not None else sys.argv[1:])
    if not args or args[0] not in SUBCOMMANDS:
        print(f'usage: laplace-hdc {{{",".join(SUBCOMMANDS)}}} [options]')
        sys.exit(0 if args and args[0] in ('-h', '--help') else 2)
    SUBCOMMANDS[args[0]](args[1:])
