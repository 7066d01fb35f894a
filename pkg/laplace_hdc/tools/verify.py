#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
laplace_hdc.tools.verify
========================

Numerical checks of the analytic guarantees of the encoder:

* the base hypervectors reproduce the kernel as their covariance;
* the expected similarity of two encodings is ``prod_i K(x(i), y(i))`` and its
  variance is at most ``2 gamma / N^2 (1 - S)``;
* ``exp(-lam |i - j|^beta)`` is positive semi-definite for ``beta <= 2`` and
  indefinite above;
* the admissible kernel is close to the Laplace kernel ``exp(-lam |i - j|)``;
* 2D families commute with image translations.

All checks are deterministic given their seeds; :func:`run_verification`
collects them into ``criterion,predicted,observed,tolerance,pass`` rows.
"""

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from numpy import abs, arange, asarray, exp, float64, int64, prod, roll, sqrt, zeros
from numpy.random import default_rng

from laplace_hdc.core.encoder import EncoderConfig, encode, encode_batch, similarity, unpack
from laplace_hdc.core.exceptions import ConfigurationError, EncodingError, PermutationLayoutError
from laplace_hdc.core.hypervectors import generate_hypervectors
from laplace_hdc.core.kernel import KernelSpec, build_kernel, kernel_from_exponent
from laplace_hdc.core.numerics import sym_eigen
from laplace_hdc.core.permutations import PermutationFamily, gamma, shift_image
from laplace_hdc.core.utils import derive_seed, write_csv

_logger = getLogger(__name__)

VERIFY_HEADER = ('criterion', 'predicted', 'observed', 'tolerance', 'pass')
MIN_TRIALS = 30
MEAN_RADIUS = 4.0
VARIANCE_SLACK = 1.3
PSD_TOLERANCE = 1e-8
INDEFINITE_MARGIN = 1e-6


class SimilarityEstimate(namedtuple('SimilarityEstimate', 'mean variance trials predicted variance_bound')):
    """Monte Carlo estimate of ``psi_x^T psi_y / N`` over independent hypervector draws"""

    @property
    def standard_error(self):
        return sqrt(self.variance / self.trials)

    @property
    def mean_ok(self):
        return abs(self.mean - self.predicted) <= MEAN_RADIUS * self.standard_error + 1e-12

    @property
    def variance_ok(self):
        return self.variance <= VARIANCE_SLACK * self.variance_bound + 1e-15


VerificationRow = namedtuple('VerificationRow', 'criterion predicted observed tolerance passed')
ShiftCheck = namedtuple('ShiftCheck', 'shift exact mismatch_fraction wrapped_pixels boundary_ratio')


def theory_similarity(x, y, km):
    """``prod_i K(x(i), y(i))``

    >>> from laplace_hdc.core.kernel import KernelMatrix
    >>> km = KernelMatrix.from_affinity([[1.0, 0.9], [0.9, 1.0]])
    >>> theory_similarity([1, 1], [2, 1], km)
    0.9
    """
    x = asarray(x, dtype=int64)
    y = asarray(y, dtype=int64)
    return float(prod(km.K[x - 1, y - 1]))


def _trial_similarity(x, y, km, family, N, seed):
    cfg = EncoderConfig(generate_hypervectors(km, N, seed), family, family.d)
    encoded = encode_batch([x, y], cfg)
    return similarity(encoded[0], encoded[1]) / N


def mc_similarity(x, y, km, family, N, trials=200, seed=0, workers=1):
    """Mean and variance of ``psi_x^T psi_y / N`` over ``trials`` hypervector draws

    Trial ``t`` draws its hypervectors from the seed derived from ``(seed, t)``.

    :rtype: SimilarityEstimate
    """
    if trials < MIN_TRIALS:
        raise ConfigurationError(f'similarity estimates need at least {MIN_TRIALS} trials, got {trials}')
    if family.N != N:
        raise PermutationLayoutError(f'permutation family acts on N={family.N}, not N={N}')
    seeds = [derive_seed(seed, t) for t in range(trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda s: _trial_similarity(x, y, km, family, N, s), seeds))
    else:
        values = [_trial_similarity(x, y, km, family, N, s) for s in seeds]
    values = asarray(values, dtype=float64)
    predicted = theory_similarity(x, y, km)
    bound = variance_bound(family, predicted)
    return SimilarityEstimate(float(values.mean()), float(values.var(ddof=1)), trials, predicted, bound)


def variance_bound(family, predicted):
    """``2 gamma / N^2 (1 - S)``"""
    return 2 * gamma(family) / family.N ** 2 * (1 - predicted)


def schoenberg_scan(beta_values, m, lam):
    """Smallest eigenvalue of ``exp(-lam |i - j|^beta)`` for every ``beta``

    >>> [(b, e >= -1e-8) for b, e in schoenberg_scan([1.0], 16, 0.1)]
    [(1.0, True)]
    """
    if m > 256:
        raise ConfigurationError(f'the spectral scan is limited to m <= 256, got {m}')
    return [(float(beta), sym_eigen(kernel_from_exponent(beta, lam, m).W).min_eigenvalue)
            for beta in beta_values]


def covariance_fidelity(km, N, seed=0):
    """Observed ``v_i^T v_j / N`` against ``K(i, j)`` for every pair ``i <= j``

    :return: rows ``(i, j, observed, predicted, tolerance)`` with the four-sigma
        tolerance ``4 sqrt((1 - K^2) / N)``
    """
    V = generate_hypervectors(km, N, seed).V.astype(float64)
    observed = V.T @ V / N
    rows = []
    for i in range(km.m):
        for j in range(i, km.m):
            k = float(km.K[i, j])
            rows.append((i + 1, j + 1, float(observed[i, j]), k, MEAN_RADIUS * sqrt(max(1 - k * k, 0.0) / N)))
    return rows


def laplace_approximation(lam, m, alpha=1.0, limit=0.1):
    """Gap between the admissible kernel and ``exp(-lam |i - j|^alpha)``

    Only pairs with ``lam |i - j|^alpha <= limit`` are compared; their gap is
    bounded by ``2 (lam |i - j|^alpha)^2``.

    :return: rows ``(distance, kernel, laplace, gap, bound)``
    """
    K = build_kernel(KernelSpec(alpha, lam, m)).K
    rows = []
    for distance in range(1, m):
        eps = lam * distance ** alpha
        if eps > limit:
            break
        k = float(K[0, distance])
        laplace = float(exp(-eps))
        rows.append((distance, k, laplace, abs(k - laplace), 2 * eps * eps))
    return rows


def reference_encode(x, cfg):
    """Encoding of ``x`` as an unpacked ``+-1`` product, one feature at a time"""
    psi = zeros(cfg.N, dtype=int64) + 1
    V = cfg.hypervectors.V
    for f, value in enumerate(asarray(x, dtype=int64)):
        psi *= V[cfg.family.feature_sources(f), value - 1]
    return psi


def _wrapped_pixels(foreground, di, dj):
    side = foreground.shape[0]
    rows = arange(side)[:, None] + di
    cols = arange(side)[None, :] + dj
    outside = (rows < 0) | (rows >= side) | (cols < 0) | (cols >= side)
    return int((foreground & outside).sum())


def _band_ratio(side, di, dj):
    di, dj = min(abs(di), side), min(abs(dj), side)
    return (di * side + dj * side - di * dj) / side ** 2


def equivariance_check(image, family, shifts, cfg, background=1):
    """Compare ``encode(shift(x))`` with the translated encoding of ``x``

    ``image`` holds the ``L`` x ``L`` feature values of a sample. Block2D
    families are exactly equivariant. On a Cyclic2D torus larger than the image,
    the encodings are compared relative to the encoding ``psi_z`` of the
    background image: ``psi_x * psi_z`` translates exactly as long as no
    foreground pixel wraps around the image border.

    :param shifts: ``(di, dj)`` pairs, possibly negative
    :param background: feature value of the background (pixel 0)
    :rtype: list of ShiftCheck
    """
    if not family.is_2d:
        raise PermutationLayoutError(f'translation equivariance needs a 2D family, got {family.kind}')
    if cfg.family != family:
        raise EncodingError('the encoder does not use the permutation family under test')
    side = family.side
    x = asarray(image, dtype=int64).reshape(side, side)
    base = unpack(encode(x.ravel(), cfg))
    if family.kind == 'cyclic2d':
        zero = unpack(encode(zeros(side * side, dtype=int64) + background, cfg))
        base = base * zero
    foreground = x != background
    checks = []
    for di, dj in shifts:
        shifted = unpack(encode(shift_image(x, di, dj).ravel(), cfg))
        if family.kind == 'block2d':
            expected = family.apply((di % side, dj % side), base)
            wrapped = 0
        else:
            shifted = shifted * zero
            M = family.copies
            expected = roll(base.reshape(M, M), (-di, -dj), axis=(0, 1)).ravel()
            wrapped = _wrapped_pixels(foreground, di, dj)
        mismatch = float((shifted != expected).mean())
        checks.append(ShiftCheck((di, dj), mismatch == 0.0, mismatch, wrapped, _band_ratio(side, di, dj)))
        if mismatch and family.kind == 'cyclic2d':
            _logger.warning(f'shift ({di}, {dj}): {wrapped} foreground pixels wrap around the image border, '
                            f'{mismatch:.1%} of the encoding differs from the translated one')
    return checks


def _fmt(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return f'{value:.10g}'
    return value


def _packing_mismatches(trials, seed):
    """Encodings and similarities that disagree with the unpacked reference"""
    mismatches = 0
    rng = default_rng(seed)
    for t in range(trials):
        N = int(rng.integers(1, 257))
        d = int(rng.integers(1, min(8, N) + 1))
        m = int(rng.integers(1, 9))
        km = build_kernel(KernelSpec(1.0, float(rng.uniform(0.05, 1.0)), m))
        cfg = EncoderConfig(generate_hypervectors(km, N, derive_seed(seed, t)),
                            PermutationFamily.cyclic_1d(d, N), d)
        x, y = rng.integers(1, m + 1, size=(2, d))
        rx, ry = reference_encode(x, cfg), reference_encode(y, cfg)
        px, py = encode(x, cfg), encode(y, cfg)
        if (unpack(px) != rx).any() or similarity(px, py) != int(rx @ ry):
            mismatches += 1
    return mismatches


def run_verification(seed=0, trials=200, N=10000, covariance_N=100000, workers=1, output=None):
    """Run every check and return ``criterion,predicted,observed,tolerance,pass`` rows

    :param seed: master seed, each check derives its own
    :param trials: hypervector redraws of the similarity checks
    :param N: hyperdimension of the similarity checks
    :param covariance_N: hyperdimension of the covariance check
    :param output: optional CSV file receiving the rows
    """
    rows = []

    def add(criterion, predicted, observed, tolerance, passed):
        rows.append(VerificationRow(criterion, _fmt(predicted), _fmt(observed), _fmt(tolerance), _fmt(bool(passed))))
        _logger.info(f'{criterion}: predicted {predicted}, observed {observed}, '
                     f'{"pass" if passed else "FAIL"}')

    km = build_kernel(KernelSpec(1.0, 0.1, 8))
    pairs = covariance_fidelity(km, covariance_N, derive_seed(seed, 1))
    worst = max(pairs, key=lambda r: abs(r[2] - r[3]) / r[4] if r[4] else abs(r[2] - r[3]))
    add('covariance_fidelity', worst[3], worst[2], worst[4],
        all(abs(o - p) <= t + 1e-12 for _, _, o, p, t in pairs))

    d = 5
    rng = default_rng(derive_seed(seed, 2))
    x = rng.integers(1, 9, size=d)
    y = x.copy()
    y[:3] = (x[:3] % 8) + 1
    estimate = mc_similarity(x, y, km, PermutationFamily.cyclic_1d(d, N), N, trials, derive_seed(seed, 3), workers)
    add('similarity_mean', estimate.predicted, estimate.mean, MEAN_RADIUS * estimate.standard_error,
        estimate.mean_ok)
    add('similarity_variance', estimate.variance_bound, estimate.variance,
        (VARIANCE_SLACK - 1) * estimate.variance_bound, estimate.variance_ok)

    small = PermutationFamily.cyclic_1d(d, 64)
    counted = gamma(small, method='support')
    add('gamma_cyclic1d', (2 * d - 1) * 64, counted, 0, counted == (2 * d - 1) * 64)
    s = estimate.predicted
    coefficient = (4 * d - 2) / 64 * (1 - s)
    observed = variance_bound(small, s)
    add('variance_coefficient', coefficient, observed, 1e-12, abs(observed - coefficient) <= 1e-12)

    for beta, min_eigenvalue in schoenberg_scan([0.5, 1.0, 2.0, 3.0, 4.0], 64, 0.01):
        if beta <= 2:
            add(f'schoenberg_beta_{beta:g}', 'psd', min_eigenvalue, PSD_TOLERANCE,
                min_eigenvalue >= -PSD_TOLERANCE)
        else:
            add(f'schoenberg_beta_{beta:g}', 'indefinite', min_eigenvalue, INDEFINITE_MARGIN,
                min_eigenvalue < -INDEFINITE_MARGIN)

    gaps = laplace_approximation(0.002, 64)
    ratio = max(gap / bound for _, _, _, gap, bound in gaps)
    add('laplace_approximation', 0.0, ratio, 1.0, ratio <= 1.0)

    family = PermutationFamily.block_2d(4, 2)
    cfg = EncoderConfig(generate_hypervectors(build_kernel(KernelSpec(1.0, 0.05, 16)), family.N, derive_seed(seed, 4)),
                        family, family.d)
    shifts = [(i, j) for i in range(4) for j in range(4)]
    failures = 0
    for image in range(20):
        sample = default_rng(derive_seed(seed, 5, image)).integers(1, 17, size=(4, 4))
        failures += sum(not c.exact for c in equivariance_check(sample, family, shifts, cfg))
    add('equivariance_block2d', 0, failures, 0, failures == 0)

    mismatches = _packing_mismatches(100, derive_seed(seed, 6))
    add('packing_oracle', 0, mismatches, 0, mismatches == 0)

    if output is not None:
        write_csv(rows, VERIFY_HEADER, output)
    return rows


def all_passed(rows):
    return all(r.passed == 'true' for r in rows)

