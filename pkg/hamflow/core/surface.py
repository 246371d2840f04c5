# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from logging import getLogger
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .system import CoreError

if TYPE_CHECKING:
    from typing import List, Optional

    from .system import Box, HamiltonianSystem

__all__ = ['DEFAULT_PROJECTION_TOL', 'EmptyLevelSetError', 'Region', 'SurfaceSample', 'sample_energy_surface',
           'sample_region']

logger = getLogger(__name__)

DEFAULT_PROJECTION_TOL = 1e-10
NEWTON_MAX = 20


class EmptyLevelSetError(CoreError):
    """Not enough points of the requested level set were found in the sampling box."""

    def __init__(self, energy: float, found: int, wanted: int):
        super().__init__(energy, found, wanted)

    def __str__(self):
        return f'level set H={self.args[0]!r}: found {self.args[1]} of {self.args[2]} points'


class Region(NamedTuple):
    """
    Sampling region: the energy surface ``H = energy`` (width 0) or the band ``|H - energy| <= width``,
    optionally restricted to a patch of the system domain.
    """

    energy: float
    width: float = 0.0
    patch: 'Optional[Box]' = None

    @property
    def is_surface(self) -> bool:
        return self.width == 0

    def __str__(self):
        kind = 'surface' if self.is_surface else f'band(width={self.width!r})'
        patch = '' if self.patch is None else f' patch={self.patch}'
        return f'{kind} H={self.energy!r}{patch}'


class SurfaceSample(NamedTuple):
    points: 'List[np.ndarray]'
    weights: np.ndarray
    """Normalized weights, proportional to 1/|grad H| on surfaces and uniform on bands."""
    energy: float
    rejected_critical: int = 0
    """Candidates dropped because they landed inside the critical neighbourhood."""
    attempts: int = 0

    def __len__(self):
        return len(self.points)


def _project(sys: 'HamiltonianSystem', y: np.ndarray, e: float, tol: float) -> 'Optional[np.ndarray]':
    for _ in range(NEWTON_MAX):
        diff = sys.energy(y) - e
        if abs(diff) <= tol:
            return y
        g = sys.gradient(y)
        gg = g @ g
        if gg == 0:
            return None
        y = y - (diff / gg) * g
    if abs(sys.energy(y) - e) <= tol:
        return y
    return None


def sample_energy_surface(sys: 'HamiltonianSystem', e: float, n: int, seed: int, *,
                          tol: float = DEFAULT_PROJECTION_TOL, max_attempts: 'Optional[int]' = None,
                          patch: 'Optional[Box]' = None) -> SurfaceSample:
    """
    Sample ``n`` points of the level set ``H = e`` inside the domain (or ``patch``).

    Candidates are drawn uniformly from the box and projected along the gradient with at most 20 Newton steps.
    Candidates that fail to converge, leave the box or end near a critical point are rejected.

    :param sys: The system.
    :param e: Energy level.
    :param n: Number of points.
    :param seed: Seed for :func:`numpy.random.default_rng`.
    :param tol: Projection tolerance on ``|H - e|``.
    :param max_attempts: Candidate budget. Defaults to ``1000 * n``.
    :param patch: Box to draw from instead of the system domain.
    :raises EmptyLevelSetError: Fewer than ``n`` points were found within the budget.
    """
    if n < 1:
        raise CoreError(f'sample count must be at least 1, got {n}')
    box = sys.domain if patch is None else patch
    budget = 1000 * n if max_attempts is None else max_attempts
    rng = np.random.default_rng(seed)

    points = []
    norms = []
    rejected_critical = 0
    attempts = 0
    while len(points) < n and attempts < budget:
        attempts += 1
        y = _project(sys, box.sample(rng), e, tol)
        if y is None or not box.contains(y):
            continue
        g_norm = float(np.linalg.norm(sys.gradient(y)))
        if g_norm < sys.crit_threshold:
            rejected_critical += 1
            continue
        points.append(y)
        norms.append(g_norm)

    if len(points) < n:
        raise EmptyLevelSetError(e, len(points), n)

    logger.debug('sampled %d points on H=%r in %d attempts (%d near-critical)', n, e, attempts, rejected_critical)
    weights = 1 / np.asarray(norms)
    # noinspection PyArgumentList
    return SurfaceSample(points, weights / weights.sum(), e, rejected_critical, attempts)


def _sample_band(sys: 'HamiltonianSystem', region: Region, n: int, seed: int,
                 max_attempts: 'Optional[int]') -> SurfaceSample:
    box = sys.domain if region.patch is None else region.patch
    budget = 1000 * n if max_attempts is None else max_attempts
    rng = np.random.default_rng(seed)
    points = []
    rejected_critical = 0
    attempts = 0
    while len(points) < n and attempts < budget:
        attempts += 1
        y = box.sample(rng)
        if abs(sys.energy(y) - region.energy) > region.width:
            continue
        if not sys.is_regular(y):
            rejected_critical += 1
            continue
        points.append(y)
    if len(points) < n:
        raise EmptyLevelSetError(region.energy, len(points), n)
    # noinspection PyArgumentList
    return SurfaceSample(points, np.full(n, 1 / n), region.energy, rejected_critical, attempts)


def sample_region(sys: 'HamiltonianSystem', region: Region, n: int, seed: int, *,
                  max_attempts: 'Optional[int]' = None) -> SurfaceSample:
    """Sample a :class:`Region`, dispatching to surface or band sampling."""
    if region.is_surface:
        return sample_energy_surface(sys, region.energy, n, seed, max_attempts=max_attempts, patch=region.patch)
    if n < 1:
        raise CoreError(f'sample count must be at least 1, got {n}')
    return _sample_band(sys, region, n, seed, max_attempts)
