# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Symplectic flowbox charts.

A chart straightens the flow near a regular point ``c``: in chart coordinates the Hamiltonian becomes ``y3``
(shifted by ``H(c)``) and the flow is the translation along y1. The chart is assembled from three pieces:

* the hyperplane section ``G = 0`` through ``c`` orthogonal to ``X_H(c)``, and the hitting time ``tau(m)`` of
  the orbit of ``m`` on it (y1 = ``-tau``);
* the energy, used directly as y3;
* coordinates on the energy slice of the section, the components along the transversal frame ``(u1, u2)`` at
  ``c`` (y2 and y4). Moving along the section at constant (y2, y4) follows the straight line in the direction of
  ``grad H(c)``, which is the Hamiltonian field of ``G`` and is symplectically orthogonal to the frame; the area
  form of the slice in these coordinates is therefore exactly ``dy2 ^ dy4``.
"""

from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from ..core.frame import RegularityError, transversal_frame
from ..core.symplectic import J, symplectic_residual
from ..flow import FlowError, IntegratorConfig, flow_point
from ..util import as_phase, dump_kv, load_record
from .common import ChartError, FlowboxError, TransversalityError

if TYPE_CHECKING:
    from typing import Iterable, Optional, Sequence, Tuple, Union

    from ..core.system import HamiltonianSystem

__all__ = ['CHART_NEWTON_MAX', 'CHART_TOL', 'ChartCertificate', 'FlowboxChart', 'build_chart',
           'chart_differential_checks', 'chart_config']

logger = getLogger(__name__)

CHART_NEWTON_MAX = 30
CHART_TOL = 1e-12
MAX_SHRINK = 6
PROBE_POINTS = 64
FD_STEP = 1e-5


class ChartCertificate(NamedTuple):
    sympl_residual: float
    """Largest ``|Dg^T J Dg - J|`` over the samples."""
    conj_residual: float
    """Largest ``|y3(g(m)) + H(c) - H(m)|``."""
    field_residual: float
    """Largest ``|Dg X_H - e1|``."""
    n_samples: int
    inverse_residual: float = 0.0
    """Largest ``|g_inv(g(m)) - m|``."""
    failures: int = 0
    """Samples where the chart could not be evaluated."""

    def to_text(self) -> str:
        return dump_kv(self._asdict())

    @classmethod
    def from_text(cls, text: 'Union[str, Iterable[str]]') -> 'ChartCertificate':
        lines = text.splitlines() if isinstance(text, str) else text
        try:
            return cls(**load_record(cls, lines))
        except ValueError as e:
            raise FlowboxError(f'malformed chart certificate: {e}') from e

    @property
    def worst(self) -> float:
        return max(self.sympl_residual, self.conj_residual, self.field_residual)


def chart_config(sys: 'HamiltonianSystem') -> IntegratorConfig:
    """The flow used inside charts: the closed form when there is one, fourth-order collocation otherwise."""
    if sys.exact_flow is not None:
        return IntegratorConfig(dt=1e3, method='exact', box_abort=False)
    return IntegratorConfig(dt=1e-3, method='gauss2', box_abort=False)


class FlowboxChart:
    """
    A flowbox chart around ``center``.

    :param sys: The Hamiltonian system.
    :param center: Regular point mapped to the origin.
    :param radius: Radius of the ball the chart is certified on.
    :param cfg: Integrator settings for the hitting-time solves.
    """

    __slots__ = ('sys', 'center', 'radius', 'cfg', 'energy', 'frame', 'field', '_field_sq', 'residuals')

    def __init__(self, sys: 'HamiltonianSystem', center: np.ndarray, radius: float,
                 cfg: 'Optional[IntegratorConfig]' = None):
        self.sys = sys
        self.center = as_phase(center)
        self.radius = float(radius)
        self.cfg = chart_config(sys) if cfg is None else cfg
        try:
            self.frame = transversal_frame(sys, self.center)
        except RegularityError as e:
            raise TransversalityError(f'no transversal section at {self.center}: {e}') from e
        self.energy = sys.energy(self.center)
        self.field = J @ sys.gradient(self.center)
        self._field_sq = float(self.field @ self.field)
        self.residuals: 'Optional[ChartCertificate]' = None

    def __repr__(self):
        return f'<{type(self).__name__} center={self.center} radius={self.radius!r} system={self.sys.name!r}>'

    def G(self, y: np.ndarray) -> float:
        """The transversal function, zero on the section through the center."""
        return -float(self.field @ (y - self.center)) / self._field_sq

    def transversality(self, y: np.ndarray) -> float:
        """``omega0(X_H(y), X_G)``; one at the center."""
        return float(self.sys.gradient(y) @ self.sys.gradient(self.center)) / self._field_sq

    def _flow(self, y: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return y
        try:
            return flow_point(self.sys, y, t, self.cfg)
        except FlowError as e:
            raise ChartError(f'flow failed inside the chart: {e}') from e

    def hit(self, m: np.ndarray) -> 'Tuple[float, np.ndarray]':
        """
        Hitting time of the section and the hit point, by damped Newton from ``tau = 0``.

        Newton runs until the correction drops to rounding level, so the chart is smooth enough for finite
        differences.

        :raises ChartError: Newton did not converge.
        """
        m = as_phase(m)
        tau = 0.0
        q = m
        f = self.G(q)
        for _ in range(CHART_NEWTON_MAX):
            if f == 0:
                return tau, q
            slope = -float(self.field @ (J @ self.sys.gradient(q))) / self._field_sq
            if abs(slope) < 1e-12:
                raise ChartError(f'the orbit of {m} is tangent to the section')
            step = -f / slope
            if abs(step) <= 1e-15 * (1 + abs(tau)):
                return tau, q
            for _ in range(10):
                q_new = self._flow(m, tau + step)
                f_new = self.G(q_new)
                if abs(f_new) < abs(f):
                    break
                step /= 2
            else:
                if abs(f) <= CHART_TOL:
                    # rounding floor
                    return tau, q
                raise ChartError(f'hitting time search stalled at {m} (|G| = {abs(f):.3e})')
            tau += step
            q = q_new
            f = f_new
        if abs(f) <= CHART_TOL:
            return tau, q
        raise ChartError(f'hitting time did not converge at {m} after {CHART_NEWTON_MAX} iterations')

    def tau(self, m: np.ndarray) -> float:
        return self.hit(m)[0]

    def g(self, m: np.ndarray) -> np.ndarray:
        """The chart: ``(-tau, <q - c, u1>, H(m) - H(c), <q - c, u2>)`` with ``q`` the hit point."""
        m = as_phase(m)
        tau, q = self.hit(m)
        d = q - self.center
        return np.array([-tau, self.frame.u1 @ d, self.sys.energy(m) - self.energy, self.frame.u2 @ d])

    def g_inv(self, z: np.ndarray) -> np.ndarray:
        """
        Inverse chart: climb from the section point ``c + z2 u1 + z4 u2`` along ``grad H(c)`` to the energy
        ``H(c) + z3``, then flow for time ``z1``.
        """
        z = as_phase(z)
        p = self.center + z[1] * self.frame.u1 + z[3] * self.frame.u2
        n = self.frame.gdir
        target = self.energy + z[2]
        s = 0.0
        f = self.sys.energy(p) - target
        for _ in range(CHART_NEWTON_MAX):
            if f == 0:
                break
            slope = float(self.sys.gradient(p + s * n) @ n)
            if abs(slope) < 1e-12:
                raise ChartError(f'energy level {target!r} is not reached along the section at {z}')
            step = -f / slope
            if abs(step) <= 1e-15 * (1 + abs(s)):
                break
            s += step
            f = self.sys.energy(p + s * n) - target
        else:
            if abs(f) > CHART_TOL * (1 + abs(target)):
                raise ChartError(f'energy projection did not converge at {z}')
        return self._flow(p + s * n, z[0])

    def differential(self, m: np.ndarray, h: float = FD_STEP) -> np.ndarray:
        """Central-difference Jacobian of :meth:`g`."""
        m = as_phase(m)
        cols = []
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            cols.append((self.g(m + e) - self.g(m - e)) / (2 * h))
        return np.column_stack(cols)

    def sample(self, n: int, seed: int) -> np.ndarray:
        """Uniform points of the ball of radius ``radius`` around the center."""
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(n, 4))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = self.radius * rng.uniform(0, 1, n) ** 0.25
        return self.center + dirs * radii[:, None]


def _point_residuals(chart: FlowboxChart, m: np.ndarray) -> 'Optional[Tuple[float, float, float, float]]':
    try:
        z = chart.g(m)
        Dg = chart.differential(m)
        back = chart.g_inv(z)
    except ChartError as e:
        logger.debug('chart not defined at %s: %s', m, e)
        return None
    sys = chart.sys
    sympl = symplectic_residual(Dg)
    conj = abs(z[2] + chart.energy - sys.energy(m))
    field = float(np.linalg.norm(Dg @ (J @ sys.gradient(m)) - np.eye(4)[0]))
    inverse = float(np.linalg.norm(back - m))
    return sympl, conj, field, inverse


def chart_differential_checks(chart: FlowboxChart, n: int = 1000, seed: int = 0, *,
                              points: 'Optional[Sequence[np.ndarray]]' = None, jobs: int = 1) -> ChartCertificate:
    """
    Measure how far the chart is from a straightening symplectomorphism on fresh samples.

    Samples where the chart cannot be evaluated are counted in ``failures``; nothing is asserted.

    :param points: Evaluate at these points instead of sampling the ball.
    :param jobs: Worker threads. Results are reduced in sample order.
    """
    pts = chart.sample(n, seed) if points is None else [as_phase(p) for p in points]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda m: _point_residuals(chart, m), pts))
    else:
        results = [_point_residuals(chart, m) for m in pts]
    good = [r for r in results if r is not None]
    failures = len(results) - len(good)
    if failures:
        logger.warning('chart at %s could not be evaluated at %d of %d samples', chart.center, failures, len(results))
    if not good:
        # noinspection PyArgumentList
        return ChartCertificate(float('inf'), float('inf'), float('inf'), 0, float('inf'), failures)
    arr = np.array(good)
    worst = arr.max(axis=0)
    # noinspection PyArgumentList
    return ChartCertificate(float(worst[0]), float(worst[1]), float(worst[2]), len(good), float(worst[3]), failures)


def _probe(chart: FlowboxChart, seed: int) -> bool:
    for m in [chart.center, *chart.sample(PROBE_POINTS, seed)]:
        try:
            chart.hit(m)
        except ChartError as e:
            logger.debug('probe failed at %s: %s', m, e)
            return False
    return True


def build_chart(sys: 'HamiltonianSystem', center: np.ndarray, radius: float,
                cfg: 'Optional[IntegratorConfig]' = None, *, n: int = 1000, seed: int = 0,
                jobs: int = 1) -> FlowboxChart:
    """
    Build a flowbox chart and certify it on ``n`` samples of the ball (no certification when ``n`` is zero).

    The radius is halved up to six times when the hitting-time solve fails on the probe points; the radius
    actually used is stored on the chart.

    :raises TransversalityError: The center is a critical point.
    :raises ChartError: The hitting time still fails after shrinking.
    """
    if not radius > 0:
        raise FlowboxError(f'chart radius must be positive, got {radius!r}')
    chart = FlowboxChart(sys, center, radius, cfg)
    for attempt in range(MAX_SHRINK + 1):
        if _probe(chart, seed):
            break
        if attempt == MAX_SHRINK:
            raise ChartError(f'hitting time fails near {chart.center} even at radius {chart.radius!r}')
        chart.radius /= 2
        logger.warning('shrinking chart radius at %s to %r', chart.center, chart.radius)
    if not n:
        logger.info('chart at %s with radius %r, not certified', chart.center, chart.radius)
        return chart
    chart.residuals = chart_differential_checks(chart, n, seed, jobs=jobs)
    logger.info('chart at %s with radius %r: residuals sympl=%.3e conj=%.3e field=%.3e', chart.center,
                chart.radius, chart.residuals.sympl_residual, chart.residuals.conj_residual,
                chart.residuals.field_residual)
    return chart
