#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.tools.experiments
=============================

End-to-end experiments driven by a :class:`.parameters.RunConfig`.

A repetition of the classification pipeline runs these stages:

1. fit the feature transform on the training images;
2. set the bandwidth from the median distance of training feature vectors;
3. build the admissible kernel over the alphabet ``1..256``;
4. draw the base hypervectors;
5. pick the permutation family with the largest ``N`` not above the cap;
6. encode training and test samples;
7. train the classifier and measure the test accuracy.

Repetition ``r`` derives all of its seeds from ``(seed, r)``, so any single
row of a results file can be recomputed on its own.
"""

from collections import namedtuple
from contextlib import contextmanager
from logging import getLogger
from pathlib import Path
from time import perf_counter
from numpy import concatenate, float64, int64, zeros
from numpy.random import default_rng
from pandas import DataFrame

from laplace_hdc.core.encoder import EncoderConfig, bind, build_encoder, encode_batch, flip_bits_batch, unpack
from laplace_hdc.core.exceptions import (ConfigurationError, DataFormatError, DegenerateDataError, EncodingError,
                                         NumericsError, ParametersError, StageError, TrainingError)
from laplace_hdc.core.kernel import KernelSpec, bandwidth_from_data
from laplace_hdc.core.permutations import largest_family, shift_image
from laplace_hdc.core.utils import derive_seed, round_half_up, write_csv
from laplace_hdc.learning.classifiers import accuracy, train
from laplace_hdc.learning.features import ALPHABET_SIZE, ImageBatch, RawTransform, fit_features
from laplace_hdc.tools.dataio import export_image, load_idx, read_model_file, save_model, write_results
from laplace_hdc.tools.plots import plot_robustness
from laplace_hdc.tools.verify import run_verification

_logger = getLogger(__name__)

ROBUSTNESS_HEADER = ('run', 'seed', 'dataset', 'encoder', 'classifier', 'flip_ratio', 'accuracy')
BENCH_HEADER = ('dataset', 'encoder', 'N', 'samples', 'workers', 'seconds', 'samples_per_s')
STAGE_ERRORS = (NumericsError, DegenerateDataError, EncodingError, TrainingError, DataFormatError, OSError)

Dataset = namedtuple('Dataset', 'train_images train_labels test_images test_labels')
Repetition = namedtuple('Repetition', 'run seed accuracy runtime model encoder transform test_encoded')


@contextmanager
def stage(name):
    """Report failures inside the block as a :class:`.exceptions.StageError` naming the stage"""
    _logger.debug(f'stage {name}')
    try:
        yield
    except ConfigurationError:
        raise
    except STAGE_ERRORS as e:
        raise StageError(name, e) from e


def load_dataset(config, train=True, test=True):
    """Images and labels named by the config, training set cut to ``train_limit``"""
    keys = (('train_images', 'train_labels') if train else ()) + (('test_images', 'test_labels') if test else ())
    config.check_paths(*keys)
    train_images = train_labels = test_images = test_labels = None
    with stage('load'):
        if train:
            train_images, train_labels = load_idx(config.train_images, config.train_labels)
            if config.train_limit is not None:
                train_images = train_images.take(slice(0, config.train_limit))
                train_labels = train_labels[:config.train_limit]
        if test:
            test_images, test_labels = load_idx(config.test_images, config.test_labels)
    return Dataset(train_images, train_labels, test_images, test_labels)


def _output_dir(config):
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _run_label(config):
    return f'{config.dataset}-{config.encoder_name}-{config.classifier}'


def _prepare_features(config, dataset):
    with stage('features'):
        transform = fit_features(config.feature_mode, dataset.train_images, config.stride, config.svd_rank)
        train_features = transform.apply(dataset.train_images)
        test_features = transform.apply(dataset.test_images) if dataset.test_images is not None else None
    return transform, train_features, test_features


def _encoder(config, train_features, seed):
    with stage('bandwidth'):
        lam = bandwidth_from_data(train_features.values, config.alpha, config.bandwidth_constant,
                                  config.bandwidth_samples, seed=derive_seed(seed, 0))
    with stage('kernel'):
        spec = KernelSpec(config.alpha, lam, ALPHABET_SIZE, config.kernel_exponent_convention)
    family = largest_family(config.kind, train_features.d, config.n_cap, config.cyclic2d_side)
    _logger.info(f'{family.kind} family: d={family.d}, N={family.N}')
    with stage('hypervectors'):
        return build_encoder(spec, family, derive_seed(seed, 1), workers=config.workers)


def _classifier_options(config, seed):
    if config.classifier.startswith('sgd'):
        return {'lr': config.lr, 'epochs': config.epochs, 'batch_size': config.batch_size,
                'seed': derive_seed(seed, 2), 'clamp': config.clamp}
    return {}


def run_repetition(config, dataset, run, prepared=None):
    """One repetition of the classification pipeline

    :param prepared: ``(transform, train_features, test_features)`` shared across repetitions
    :rtype: Repetition
    """
    seed = derive_seed(config.seed, run)
    start = perf_counter()
    transform, train_features, test_features = prepared or _prepare_features(config, dataset)
    cfg = _encoder(config, train_features, seed)
    with stage('encoding'):
        train_encoded = encode_batch(train_features, cfg, workers=config.workers)
        test_encoded = encode_batch(test_features, cfg, workers=config.workers)
    provenance = {'encoder': cfg.provenance, 'dataset': config.dataset, 'features': transform.name,
                  'run': run, 'seed': seed}
    with stage('training'):
        model = train(config.classifier, train_encoded, dataset.train_labels, provenance=provenance,
                      **_classifier_options(config, seed))
    with stage('evaluation'):
        acc = accuracy(model, test_encoded, dataset.test_labels, workers=config.workers)
    runtime = perf_counter() - start
    _logger.info(f'repetition {run}: accuracy {acc:.4f} in {runtime:.1f} s')
    return Repetition(run, seed, acc, runtime, model, cfg, transform, test_encoded)


def _encoder_label(config, cfg):
    return f'{config.encoder_name}-N{cfg.N}'


def _runtime(config, seconds):
    return '' if config.omit_runtime else f'{seconds:.1f}'


def run_pipeline(config, dataset=None):
    """Train and evaluate ``repetitions`` times, one CSV row and one model file per repetition

    :return: list of :class:`Repetition`
    """
    dataset = dataset if dataset is not None else load_dataset(config)
    out = _output_dir(config)
    results = out / f'{_run_label(config)}.csv'
    write_results([], results, append=False)
    prepared = _prepare_features(config, dataset)
    repetitions = []
    for run in range(config.repetitions):
        rep = run_repetition(config, dataset, run, prepared)
        write_results([(run, rep.seed, config.dataset, _encoder_label(config, rep.encoder), config.classifier,
                        f'{rep.accuracy:.6f}', _runtime(config, rep.runtime))], results)
        with stage('saving'):
            save_model(rep.model, out / f'{_run_label(config)}-run{run}.lhdc', rep.transform)
        repetitions.append(rep._replace(test_encoded=None))
    return repetitions


def flip_count(ratio, N):
    """Number of bits flipped for a ratio, rounded half up

    >>> flip_count(0.25, 10000), flip_count(0.5, 9409)
    (2500, 4705)
    """
    return int(round_half_up(ratio * N))


def robustness_summary(rows):
    """Mean, standard deviation and count of the accuracy per flip ratio"""
    frame = DataFrame(rows, columns=ROBUSTNESS_HEADER)
    frame['accuracy'] = frame['accuracy'].astype(float64)
    frame['flip_ratio'] = frame['flip_ratio'].astype(float64)
    return frame.groupby('flip_ratio')['accuracy'].agg(['mean', 'std', 'count'])


def run_robustness(config, dataset=None):
    """Accuracy of clean-trained models on test encodings with a ratio of flipped bits

    Writes every ``(repetition, ratio)`` measurement and a per-ratio summary.

    :return: the summary :class:`pandas.DataFrame`
    """
    dataset = dataset if dataset is not None else load_dataset(config)
    out = _output_dir(config)
    label = _run_label(config)
    prepared = _prepare_features(config, dataset)
    rows = []
    for run in range(config.repetitions):
        rep = run_repetition(config, dataset, run, prepared)
        encoder = _encoder_label(config, rep.encoder)
        for i, ratio in enumerate(config.flip_ratios):
            with stage('corruption'):
                corrupted = flip_bits_batch(rep.test_encoded, flip_count(ratio, rep.encoder.N),
                                            derive_seed(rep.seed, 3, i))
            with stage('evaluation'):
                acc = accuracy(rep.model, corrupted, dataset.test_labels, workers=config.workers)
            _logger.info(f'repetition {run}, flip ratio {ratio:g}: accuracy {acc:.4f}')
            rows.append((run, rep.seed, config.dataset, encoder, config.classifier, f'{ratio:g}', f'{acc:.6f}'))
    write_csv(rows, ROBUSTNESS_HEADER, out / f'{label}-robustness.csv')
    summary = robustness_summary(rows)
    summary.to_csv(out / f'{label}-robustness-summary.csv', float_format='%.6f', lineterminator='\n')
    if config.png:
        plot_robustness(summary, out / f'{label}-robustness.png',
                        title=label)
    return summary


def _hypervector_grid(family, signs):
    """Arrange ``+-1`` entries of an encoding in the 2D layout of its family"""
    if family.kind == 'cyclic2d':
        return signs.reshape(family.copies, family.copies)
    grid = signs.reshape(family.side, family.side, family.copies)
    return concatenate([grid[:, :, k] for k in range(family.copies)], axis=1)


def _default_samples(labels):
    """First test sample of every class"""
    seen = {}
    for i, label in enumerate(labels):
        seen.setdefault(int(label), i)
    return [seen[c] for c in sorted(seen)]


def run_visualize(config, dataset=None, shift=None):
    """Export ``psi_x * psi_z`` images relative to the blank image ``z``

    One image per selected test sample, optionally the same sample translated by
    ``shift``, and one float image per class averaging ``psi_x * psi_z`` over the
    test samples of that class.

    :return: paths of the exported PGM files
    """
    if config.kind not in ('cyclic2d', 'block2d'):
        raise ParametersError(f'visualization needs a 2D permutation family, got {config.kind}')
    dataset = dataset if dataset is not None else load_dataset(config)
    out = _output_dir(config)
    transform, train_features, test_features = _prepare_features(config, dataset)
    cfg = _encoder(config, train_features, derive_seed(config.seed, 0))
    family = cfg.family
    side = dataset.test_images.side
    with stage('encoding'):
        blank = transform.apply(ImageBatch(zeros((1, side, side), dtype=int64)))
        psi_z = encode_batch(blank, cfg)[0]
    samples = config.sample_ids if config.sample_ids is not None else _default_samples(dataset.test_labels)
    exported = []
    with stage('export'):
        for i in samples:
            if not 0 <= i < dataset.test_images.count:
                raise ParametersError(f'sample id {i} out of range for {dataset.test_images.count} test images')
            label = int(dataset.test_labels[i])
            images = [(f'sample{i}-class{label}', dataset.test_images.take([i]))]
            if shift is not None:
                moved = ImageBatch(shift_image(dataset.test_images.pixels[i], *shift)[None], side)
                images.append((f'sample{i}-class{label}-shift{shift[0]}x{shift[1]}', moved))
            for name, image in images:
                relative = bind(encode_batch(transform.apply(image), cfg)[0], psi_z)
                grid = _hypervector_grid(family, unpack(relative))
                exported.append(export_image(grid, out / f'{name}.pgm', png=config.png))
        relative = unpack(bind(encode_batch(test_features, cfg, workers=config.workers), psi_z))
        for label in sorted(set(int(c) for c in dataset.test_labels)):
            average = relative[dataset.test_labels == label].mean(axis=0)
            exported.append(export_image(_hypervector_grid(family, average), out / f'class{label}-average.pgm',
                                         png=config.png))
    _logger.info(f'exported {len(exported)} images to {out}')
    return exported


def run_eval(config, dataset=None):
    """Accuracy of a saved model on the test images named by the config

    The encoder is re-created from the provenance stored with the model.
    """
    if config.model_path is None or not Path(config.model_path).is_file():
        raise ParametersError(f'model file "{config.model_path}" does not exist')
    dataset = dataset if dataset is not None else load_dataset(config, train=False)
    start = perf_counter()
    with stage('loading'):
        stored = read_model_file(config.model_path)
    model = stored.model
    transform = stored.transform if stored.transform is not None else RawTransform()
    if 'encoder' not in model.provenance:
        raise StageError('loading', DataFormatError(f'{config.model_path} does not record its encoder'))
    with stage('hypervectors'):
        cfg = EncoderConfig.from_provenance(model.provenance['encoder'], workers=config.workers)
    with stage('encoding'):
        encoded = encode_batch(transform.apply(dataset.test_images), cfg, workers=config.workers)
    with stage('evaluation'):
        acc = accuracy(model, encoded, dataset.test_labels, workers=config.workers)
    runtime = perf_counter() - start
    out = _output_dir(config)
    encoder = f'{transform.name}-{cfg.family.kind}-N{cfg.N}'
    write_results([(model.provenance.get('run', 0), model.provenance.get('seed', ''), config.dataset, encoder,
                    model.mode, f'{acc:.6f}', _runtime(config, runtime))],
                  out / f'{config.dataset}-{encoder}-{model.mode}-eval.csv', append=False)
    return acc


def run_bench(config, dataset=None):
    """Encoding throughput in samples per second

    Uses the configured test images when given, seeded random images otherwise.
    """
    if dataset is None and config.test_images is not None:
        dataset = load_dataset(config, train=False)
    if dataset is not None:
        images = dataset.test_images.take(slice(0, config.bench_samples))
    else:
        rng = default_rng(derive_seed(config.seed, 7))
        images = ImageBatch(rng.integers(0, 256, size=(config.bench_samples, 28, 28)))
    bench_set = Dataset(images, None, None, None)
    transform, features, _ = _prepare_features(config, bench_set)
    cfg = _encoder(config, features, derive_seed(config.seed, 0))
    with stage('encoding'):
        start = perf_counter()
        encode_batch(features, cfg, workers=config.workers)
        seconds = perf_counter() - start
    rate = features.count / seconds if seconds > 0 else float('inf')
    out = _output_dir(config)
    write_csv([(config.dataset, _encoder_label(config, cfg), cfg.N, features.count, config.workers,
                f'{seconds:.4f}', f'{rate:.1f}')], BENCH_HEADER, out / 'bench.csv', append=True)
    _logger.info(f'encoded {features.count} samples in {seconds:.3f} s ({rate:.1f} samples/s)')
    return rate


def run_verify(config):
    """All numerical checks, written to ``verification.csv``"""
    out = _output_dir(config)
    with stage('verification'):
        return run_verification(seed=config.seed, trials=config.trials, workers=config.workers,
                                output=out / 'verification.csv')
