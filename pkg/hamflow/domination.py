# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Dominated splitting tests along orbits of the transversal cocycle.

An orbit has an m-dominated splitting when, at every sampled time, the stretch of ``Phi^m`` along the stable
direction is at most half the stretch along the unstable one. Directions are estimated from windows of length
``4 m`` on both sides of each sample time, or supplied at the base point and carried along.
"""

from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from math import floor, sin
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.linalg import svd

from .common import HamflowError
from .core.frame import RegularityError
from .core.system import EvaluationError
from .core.surface import sample_energy_surface
from .flow import FlowError, IntegratorConfig, UnsupportedError
from .lyapunov import DEFAULT_SPLITTING_THRESHOLD, TrivialSplittingError, oseledets_splitting
from .perturb.common import ValidityError
from .poincare import cocycle_blocks
from .util import ScaledProduct, as_phase, canonical_sign, line_angle, unit

if TYPE_CHECKING:
    from typing import List, Optional, Sequence, Tuple

    from .core.surface import Box
    from .core.system import HamiltonianSystem

    Directions = Tuple[np.ndarray, np.ndarray]

__all__ = ['DOMINATION_RATIO', 'DominationError', 'DominationReport', 'HyperbolicityCertificate',
           'PointClassification', 'domination_scan', 'conservation_identity_residual', 'anosov_diagnostic',
           'classify_point', 'SCAN_COLUMNS', 'scan_row']

logger = getLogger(__name__)

DOMINATION_RATIO = 0.5

SCAN_COLUMNS = ('x1', 'x2', 'x3', 'x4', 'm', 'worst_ratio', 'classification', 'lambda_plus', 'escaped')


class DominationError(HamflowError):
    """Generic exception for domination tests."""


class DominationReport(NamedTuple):
    m: int
    ratios: 'List[float]'
    worst: float
    dominated: bool
    trivial: bool
    """The orbit exponent is below the splitting threshold."""
    exponent: float
    times: 'List[float]'
    base: np.ndarray
    T: float

    @property
    def classification(self) -> str:
        return f'Dominated({self.m})' if self.dominated else 'NotDominated'


class HyperbolicityCertificate(NamedTuple):
    C: float
    theta: float
    contraction_m: int
    """Smallest dominating window, 0 if none was found."""
    satisfied: bool
    worst: float = float('nan')
    """Worst sampled ratio at ``contraction_m``."""


class PointClassification(NamedTuple):
    label: str
    """``D(m)``, ``Z-candidate`` or ``escaped``."""
    m: 'Optional[int]'
    worst: float
    exponent: float
    escaped: bool = False


class _OrbitBlocks:
    """Unit blocks along an orbit, padded on both sides for the direction windows."""

    __slots__ = ('blocks', 'pad', 'count')

    def __init__(self, sys: 'HamiltonianSystem', y0: np.ndarray, length: int, pad: int, cfg: IntegratorConfig):
        forward = [b.Phi for b in cocycle_blocks(sys, y0, length + pad, cfg)]
        # backward blocks map N(-j) to N(-j-1); the forward block from -j-1 to -j is their inverse
        backward = [np.linalg.inv(b.Phi) for b in cocycle_blocks(sys, y0, -pad, cfg)] if pad else []
        self.blocks = backward[::-1] + forward
        self.pad = pad
        self.count = length

    def __repr__(self):
        return f'<{type(self).__name__} count={self.count} pad={self.pad}>'

    def directions(self, k: int, window: int) -> 'Directions':
        # unstable: most expanded image direction of the window arriving at k
        u, _, _ = svd(self.scaled(k - window, k))
        n_plus = canonical_sign(u[:, 0])
        # stable: least expanded direction of the window leaving k
        _, _, vh = svd(self.scaled(k, k + window))
        n_minus = canonical_sign(vh[1])
        return n_plus, n_minus

    def scaled(self, start: int, stop: int) -> np.ndarray:
        prod = ScaledProduct()
        for j in range(start, stop):
            prod.push(self.blocks[self.pad + j])
        return prod.matrix

    def exponent(self) -> float:
        prod = ScaledProduct()
        for j in range(self.count):
            prod.push(self.blocks[self.pad + j])
        return prod.log_norm() / self.count if self.count else 0.0


def _stretch(m: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(m @ v) / np.linalg.norm(v))


def _ratios(orbit: _OrbitBlocks, m: int, n_samples: int, directions: 'Optional[Directions]') -> 'List[float]':
    ratios = []
    if directions is not None:
        vp = unit(np.asarray(directions[0], dtype=np.float64))
        vm = unit(np.asarray(directions[1], dtype=np.float64))
    for k in range(n_samples):
        if directions is None:
            vp, vm = orbit.directions(k, 4 * m)
        block = orbit.scaled(k, k + m)
        ratios.append(_stretch(block, vm) / _stretch(block, vp))
        if directions is not None:
            step = orbit.blocks[orbit.pad + k]
            vp, vm = unit(step @ vp), unit(step @ vm)
    return ratios


def _report(orbit: _OrbitBlocks, y0: np.ndarray, m: int, T: float, directions: 'Optional[Directions]',
            threshold: float, strict: bool) -> DominationReport:
    exponent = orbit.exponent()
    trivial = exponent < threshold
    if trivial and strict:
        raise TrivialSplittingError(exponent, threshold)
    n_samples = int(floor(T - m + 1e-9)) + 1
    ratios = _ratios(orbit, m, n_samples, directions)
    worst = max(ratios)
    dominated = not trivial and worst <= DOMINATION_RATIO
    logger.debug('domination m=%d at %s: worst %r, trivial %s', m, y0, worst, trivial)
    # noinspection PyArgumentList
    return DominationReport(m, ratios, worst, dominated, trivial, exponent, [float(k) for k in range(n_samples)],
                            y0, T)


def domination_scan(sys: 'HamiltonianSystem', y0: np.ndarray, m: int, T: float,
                    cfg: IntegratorConfig = IntegratorConfig(), *, directions: 'Optional[Directions]' = None,
                    threshold: float = DEFAULT_SPLITTING_THRESHOLD, strict: bool = False) -> DominationReport:
    """
    Test the m-domination inequality at the integer times ``0 <= t_k <= T - m`` of the orbit of ``y0``.

    :param m: Window length in time units.
    :param directions: ``(n_plus, n_minus)`` in frame coordinates at ``y0``, carried along the orbit by the
        cocycle. Estimated per sample time from windows of length ``4 m`` when not given.
    :param threshold: Orbits with exponent below this are flagged trivial and never classified as dominated.
    :param strict: Raise :class:`TrivialSplittingError` for trivial orbits instead of flagging them.
    """
    y0 = as_phase(y0)
    if m < 1:
        raise DominationError(f'window m must be at least 1, got {m}')
    if T < m:
        raise DominationError(f'orbit length {T!r} is shorter than the window {m}')
    length = int(floor(T + 1e-9))
    pad = 0 if directions is not None else 4 * m
    orbit = _OrbitBlocks(sys, y0, length, pad, cfg)
    return _report(orbit, y0, m, T, directions, threshold, strict)


def _stretches(Phi: np.ndarray, n_plus: np.ndarray, n_minus: np.ndarray) -> 'Tuple[float, float, float]':
    vp = Phi @ n_plus
    vm = Phi @ n_minus
    return float(np.linalg.norm(vp)), float(np.linalg.norm(vm)), sin(line_angle(vp, vm))


def conservation_identity_residual(sys: 'HamiltonianSystem', y0: np.ndarray, t: float,
                                   cfg: IntegratorConfig = IntegratorConfig(), *,
                                   directions: 'Optional[Directions]' = None, window: float = 20.0) -> float:
    """
    Relative residual of the transversal area identity along the splitting.

    Frames are normalized so that ``omega(u1, u2) = 1`` at every point, so the transversal cocycle ``Phi`` is
    area preserving and ``sin(gamma_0) = sin(gamma_t) * s_plus * s_minus``, where ``gamma`` is the angle between
    the two directions and ``s_plus``, ``s_minus`` are their stretches under ``Phi``. The invariant 3-volume on the
    energy surface carries a ``1 / |grad H|`` density which cancels the ``|X_H|`` factor of the flow direction, so
    no speed factor enters. The residual is measured relative to ``sin(gamma_0)``.

    :param directions: Unit directions at ``y0`` in frame coordinates. Estimated with a window of ``window``
        when not given.
    """
    y0 = as_phase(y0)
    if directions is None:
        split = oseledets_splitting(sys, y0, window, cfg)
        directions = (split.n_plus, split.n_minus)
    n_plus = unit(np.asarray(directions[0], dtype=np.float64))
    n_minus = unit(np.asarray(directions[1], dtype=np.float64))

    Phi = np.eye(2)
    for b in cocycle_blocks(sys, y0, t, cfg):
        Phi = b.Phi @ Phi
    s_plus, s_minus, sin_t = _stretches(Phi, n_plus, n_minus)
    sin_0 = sin(line_angle(n_plus, n_minus))

    return float(abs(sin_0 - sin_t * s_plus * s_minus) / sin_0)


def _log_ratio_fit(series: 'Sequence[Tuple[int, float]]') -> 'Tuple[float, float]':
    ts = np.array([t for t, _ in series], dtype=np.float64)
    logs = np.log([max(r, 1e-300) for _, r in series])
    slope, _ = np.polyfit(ts, logs, 1)
    theta = float(np.exp(slope))
    C = float(np.max(np.exp(logs - ts * slope)))
    return C, theta


def anosov_diagnostic(sys: 'HamiltonianSystem', e: float, m_max: int, n: int, T: float, seed: int,
                      cfg: IntegratorConfig = IntegratorConfig(), *, patch: 'Optional[Box]' = None,
                      jobs: int = 1) -> HyperbolicityCertificate:
    """
    Look for a uniform dominating window on a sampled energy surface and fit ``ratio(t) <= C * theta^t``.

    :param m_max: Largest window tried.
    :param n: Number of sampled points.
    :param T: Orbit length per point; must be at least ``m_max``.
    :raises DominationError: ``n`` is zero.
    """
    if n < 1:
        raise DominationError('the diagnostic needs at least one sample point')
    if T < m_max:
        raise DominationError(f'orbit length {T!r} is shorter than the largest window {m_max}')
    sample = sample_energy_surface(sys, e, n, seed, patch=patch)
    length = int(floor(T + 1e-9))

    def build(m):
        # padded by 4 m on both sides
        if jobs > 1:
            with ThreadPoolExecutor(jobs) as pool:
                return list(pool.map(lambda y: _OrbitBlocks(sys, y, length, 4 * m, cfg), sample.points))
        return [_OrbitBlocks(sys, y, length, 4 * m, cfg) for y in sample.points]

    chosen = 0
    worst_at_chosen = float('nan')
    orbits = []
    for m in range(1, m_max + 1):
        orbits = build(m)
        reports = [_report(o, y, m, T, None, DEFAULT_SPLITTING_THRESHOLD, False)
                   for o, y in zip(orbits, sample.points)]
        worst = max(r.worst for r in reports)
        if all(r.dominated for r in reports):
            chosen = m
            worst_at_chosen = worst
            break

    window = orbits[0].pad
    series = []
    for o in orbits:
        n_plus, n_minus = o.directions(0, window)
        for t in range(1, window + 1):
            block = o.scaled(0, t)
            series.append((t, _stretch(block, n_minus) / _stretch(block, n_plus)))
    C, theta = _log_ratio_fit(series)
    satisfied = chosen > 0 and theta < 1
    logger.info('anosov diagnostic on H=%r: m=%d, C=%r, theta=%r, satisfied=%s', e, chosen, C, theta, satisfied)
    # noinspection PyArgumentList
    return HyperbolicityCertificate(C, theta, chosen, satisfied, worst_at_chosen)


def classify_point(sys: 'HamiltonianSystem', y0: np.ndarray, m_max: int, T: float,
                   cfg: IntegratorConfig = IntegratorConfig(), *,
                   threshold: float = DEFAULT_SPLITTING_THRESHOLD) -> PointClassification:
    """
    Smallest dominating window up to ``m_max`` at ``y0``.

    Orbits that cannot be followed to the end are labelled ``escaped`` with the reason logged;
    everything else that is not dominated is a ``Z-candidate``.

    :raises UnsupportedError: The integrator cannot run this system at all.
    """
    y0 = as_phase(y0)
    length = int(floor(T + 1e-9))
    worst = float('nan')
    exponent = 0.0
    for m in range(1, min(m_max, length) + 1):
        try:
            orbit = _OrbitBlocks(sys, y0, length, 4 * m, cfg)
        except UnsupportedError:
            raise
        except (FlowError, RegularityError, ValidityError, EvaluationError) as e:
            logger.info('point %s flagged as escaped: %s', y0, e)
            # noinspection PyArgumentList
            return PointClassification('escaped', None, float('nan'), float('nan'), True)
        report = _report(orbit, y0, m, T, None, threshold, False)
        worst = report.worst
        exponent = report.exponent
        if report.dominated:
            # noinspection PyArgumentList
            return PointClassification(f'D({m})', m, worst, exponent)
    # noinspection PyArgumentList
    return PointClassification('Z-candidate', None, worst, exponent)


def scan_row(y0: np.ndarray, c: PointClassification) -> list:
    return [*y0, c.m, c.worst, c.label, c.exponent, c.escaped]
