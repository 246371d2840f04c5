# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Finite-time Lyapunov exponents of the transversal cocycle.

Every exponent here is a finite-time value: (1/T) log of a cocycle norm over a fixed window. By subadditivity these
are upper bounds for the integrated exponent, which is what the averages in :func:`integrated_le` report.
"""

from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from math import log, sqrt
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.linalg import qr, svd

from .common import HamflowError
from .core.frame import RegularityError, transversal_frame
from .core.surface import Region, sample_region
from .flow import EscapeError, IntegratorConfig, tangent_blocks
from .poincare import cocycle_blocks
from .util import ScaledProduct, as_phase, canonical_sign, line_angle, perp, sin_angle

if TYPE_CHECKING:
    from typing import List, Optional, Sequence, Tuple

    from .core.system import HamiltonianSystem

__all__ = ['DEFAULT_SPLITTING_THRESHOLD', 'LyapunovError', 'TrivialSplittingError', 'NoValidSamplesError',
           'ExponentEstimate', 'SplittingEstimate', 'IntegratedLE', 'upper_exponent', 'product_exponent',
           'oseledets_splitting', 'exponent_equality_check', 'integrated_le', 'exponent_windows', 'angle_decay',
           'EXPONENT_COLUMNS', 'exponent_row']

logger = getLogger(__name__)

DEFAULT_SPLITTING_THRESHOLD = 1e-2

EXPONENT_COLUMNS = ('seed', 'x1', 'x2', 'x3', 'x4', 'T', 'lambda_plus', 'renorm_count', 'escaped')


class LyapunovError(HamflowError):
    """Generic exception for exponent estimation."""


class TrivialSplittingError(LyapunovError):
    """The exponent is below the splitting threshold, so there is no hyperbolic splitting to estimate."""

    def __init__(self, exponent: float, threshold: float):
        super().__init__(exponent, threshold)

    @property
    def exponent(self) -> float:
        return self.args[0]

    def __str__(self):
        return f'exponent {self.args[0]:.3e} is below the splitting threshold {self.args[1]:.3e}'


class NoValidSamplesError(LyapunovError):
    """Every sampled orbit escaped or hit a critical point."""


class ExponentEstimate(NamedTuple):
    lambda_plus: float
    T: float
    renorm_count: int
    base: np.ndarray


class SplittingEstimate(NamedTuple):
    n_plus: np.ndarray
    """Unstable direction, in (u1, u2) coordinates of the frame at ``base``."""
    n_minus: np.ndarray
    """Stable direction, in the same coordinates."""
    angle: float
    forward_T: float
    backward_T: float
    base: np.ndarray
    exponent: float


class IntegratedLE(NamedTuple):
    value: float
    T: float
    n_samples: int
    """Samples that contributed to the average."""
    std_error: float
    region: Region
    escaped: int = 0
    """Samples dropped because the orbit escaped or became near-critical."""


def product_exponent(matrices: 'Sequence[np.ndarray]', T: float) -> 'Tuple[float, int]':
    """(1/T) log |M_n ... M_1| computed with rescaling, and the number of rescaled products."""
    prod = ScaledProduct(matrices[0].shape[0] if len(matrices) else 2)
    for m in matrices:
        prod.push(m)
    if not len(matrices) or T == 0:
        return 0.0, prod.count
    return prod.log_norm() / abs(T), prod.count


def _check_exponent(value: float) -> float:
    if value < -1e-9:
        raise LyapunovError(f'negative exponent {value!r}: the cocycle is not area preserving')
    return max(value, 0.0)


def upper_exponent(sys: 'HamiltonianSystem', y0: np.ndarray, T: float, cfg: IntegratorConfig = IntegratorConfig(),
                   *, inverse: bool = False) -> ExponentEstimate:
    """
    Finite-time upper exponent (1/T) log |Phi^T(y0)| of the transversal cocycle.

    The product of unit-time blocks is renormalized after every block, so long windows do not overflow.

    :param inverse: Use the inverse cocycle instead. For area-preserving cocycles this gives the same value.
    """
    y0 = as_phase(y0)
    blocks = [b.Phi for b in cocycle_blocks(sys, y0, T, cfg)]
    if inverse:
        blocks = [np.linalg.inv(b) for b in reversed(blocks)]
    value, count = product_exponent(blocks, T)
    logger.debug('upper exponent over T=%r from %d blocks: %r', T, count, value)
    # noinspection PyArgumentList
    return ExponentEstimate(_check_exponent(value), T, count, y0)


def _top_right_singular(m: np.ndarray) -> np.ndarray:
    _, _, vh = svd(m)
    return vh[0]


def oseledets_splitting(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                        cfg: IntegratorConfig = IntegratorConfig(), *,
                        threshold: float = DEFAULT_SPLITTING_THRESHOLD) -> SplittingEstimate:
    """
    Estimate the stable and unstable directions at ``y0`` from forward and backward windows of length ``T``.

    The stable direction is the least expanded one under the forward window, the unstable direction the least
    expanded one under the backward window. Both are returned in frame coordinates with a canonical sign.

    :raises TrivialSplittingError: The forward exponent is below ``threshold``.
    """
    y0 = as_phase(y0)
    forward = ScaledProduct()
    for b in cocycle_blocks(sys, y0, T, cfg):
        forward.push(b.Phi)
    exponent = forward.log_norm() / T if T else 0.0
    if exponent < threshold:
        raise TrivialSplittingError(exponent, threshold)

    backward = ScaledProduct()
    for b in cocycle_blocks(sys, y0, -T, cfg):
        backward.push(b.Phi)

    n_minus = canonical_sign(perp(_top_right_singular(forward.matrix)))
    n_plus = canonical_sign(perp(_top_right_singular(backward.matrix)))
    angle = line_angle(n_plus, n_minus)
    logger.debug('splitting at %s: exponent %r, angle %r', y0, exponent, angle)
    # noinspection PyArgumentList
    return SplittingEstimate(n_plus, n_minus, angle, T, T, y0, exponent)


def exponent_equality_check(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                            cfg: IntegratorConfig = IntegratorConfig()) -> 'Tuple[float, float]':
    """
    Exponent of the full tangent flow started on the transversal directions, next to the transversal one.

    The tangent value follows the 2-plane spanned by the start frame under D phi, re-orthonormalized by QR after
    every unit of time. Nothing is projected out: the image plane picks up components along X_H and grad H, and
    the largest stretch inside that plane is measured. Those components change it by a subexponential factor
    only, so the two rates agree in the limit.
    """
    y0 = as_phase(y0)
    Q = transversal_frame(sys, y0).basis
    growth = ScaledProduct()
    for _, state in tangent_blocks(sys, y0, T, cfg):
        Q, R = qr(state.F @ Q, mode='economic')
        growth.push(R)
    tangent = _check_exponent(growth.log_norm() / T) if T else 0.0
    transversal = upper_exponent(sys, y0, T, cfg).lambda_plus
    return tangent, transversal


def _sample_exponent(sys: 'HamiltonianSystem', y: np.ndarray, T: float,
                     cfg: IntegratorConfig) -> 'Optional[ExponentEstimate]':
    try:
        return upper_exponent(sys, y, T, cfg)
    except (EscapeError, RegularityError) as e:
        logger.debug('dropping sample %s: %s', y, e)
        return None


def integrated_le(sys: 'HamiltonianSystem', region: Region, T: float, n: int, seed: int,
                  cfg: IntegratorConfig = IntegratorConfig(), *, jobs: int = 1) -> IntegratedLE:
    """
    Weighted Monte Carlo average of finite-time exponents over a sampled region.

    Orbits that escape or become near-critical are dropped and counted, never imputed.

    :param jobs: Worker threads. Results are reduced in sample order regardless.
    :raises NoValidSamplesError: No sample survived.
    """
    if n < 2:
        raise LyapunovError(f'at least 2 samples are needed, got {n}')
    sample = sample_region(sys, region, n, seed)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda y: _sample_exponent(sys, y, T, cfg), sample.points))
    else:
        results = [_sample_exponent(sys, y, T, cfg) for y in sample.points]

    values = np.array([r.lambda_plus for r in results if r is not None])
    weights = np.array([w for r, w in zip(results, sample.weights) if r is not None])
    escaped = len(results) - len(values)
    if escaped:
        logger.warning('dropped %d of %d samples (escaped or near-critical)', escaped, len(results))
    if not len(values):
        raise NoValidSamplesError(f'no valid samples in {region}')

    weights = weights / weights.sum()
    mean = float(weights @ values)
    std_error = sqrt(float(weights ** 2 @ (values - mean) ** 2))
    logger.info('integrated exponent over %s: %r +- %r from %d samples', region, mean, std_error, len(values))
    # noinspection PyArgumentList
    return IntegratedLE(mean, T, len(values), std_error, region, escaped)


def exponent_windows(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                     cfg: IntegratorConfig = IntegratorConfig()) -> 'Tuple[float, float]':
    """Finite-time exponents over windows T and 2T, reported side by side as a convergence diagnostic."""
    short = upper_exponent(sys, y0, T, cfg).lambda_plus
    long = upper_exponent(sys, y0, 2 * T, cfg).lambda_plus
    logger.info('two-window exponents at %s: T=%r -> %r, 2T -> %r', y0, T, short, long)
    return short, long


def angle_decay(sys: 'HamiltonianSystem', y0: np.ndarray, T: float, cfg: IntegratorConfig = IntegratorConfig(),
                *, splitting: 'Optional[SplittingEstimate]' = None,
                window: float = 20.0) -> 'List[Tuple[float, float]]':
    """
    Sine of the angle between the transported stable and unstable directions after every unit of time.

    :param splitting: Directions at ``y0``. Estimated with a window of ``window`` when not given.
    :return: A list of ``(t, sin angle)``, starting at ``t = 0``.
    """
    y0 = as_phase(y0)
    if splitting is None:
        splitting = oseledets_splitting(sys, y0, window, cfg)
    vp = splitting.n_plus.copy()
    vm = splitting.n_minus.copy()
    out = [(0.0, float(sin_angle(vp, vm)))]
    elapsed = 0.0
    for b in cocycle_blocks(sys, y0, T, cfg):
        vp = b.Phi @ vp
        vp /= np.linalg.norm(vp)
        vm = b.Phi @ vm
        vm /= np.linalg.norm(vm)
        elapsed += b.t
        s = float(sin_angle(vp, vm))
        logger.debug('angle decay t=%r: sin=%r log=%r', elapsed, s, log(s) if s > 0 else float('-inf'))
        out.append((elapsed, s))
    return out


def exponent_row(seed: int, estimate: 'Optional[ExponentEstimate]', y0: np.ndarray, T: float) -> list:
    """One row of the exponent scan table. ``estimate`` is None for escaped orbits."""
    if estimate is None:
        return [seed, *y0, T, None, None, True]
    return [seed, *estimate.base, T, estimate.lambda_plus, estimate.renorm_count, False]
