# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Transport of the bump rotation to a regular point, and schedules of realized rotations.

Inside a flowbox chart ``g`` the system reads ``y3 + H(c)``, so subtracting ``alpha * B(g(m))`` reproduces the
model perturbation in chart coordinates. The flow of the result is the chart conjugate of the closed-form model
flow, which is what the realized system exposes as its exact flow.
"""

from logging import getLogger
from math import ceil, pi
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from ..core.symplectic import J
from ..core.system import HamiltonianSystem, fd_hessian
from ..flow import IntegratorConfig, integrate, integrate_tangent
from ..perturb import (DEFAULT_CERTIFY_GRID, DEFAULT_UNIVERSAL, CertificateError, ValidityError, alpha0,
                       build_bumps, bump_terms, certify, closed_form_flow)
from ..poincare import transversal_cocycle
from ..util import as_phase, dump_kv, format_value, load_kv, parse_floats, rotation
from .chart import ChartError, build_chart, chart_config
from .common import FlowboxOverlapError, ScheduleError

if TYPE_CHECKING:
    from typing import Iterable, List, Optional, Sequence, Tuple, Union

    from ..perturb import BumpProfile, PerturbationCertificate
    from .chart import FlowboxChart

__all__ = ['DEFAULT_NU', 'Segment', 'RealizationSchedule', 'realized_system', 'realize_rotation',
           'check_flowbox_orbit', 'concatenate', 'schedule_from_certificate']

logger = getLogger(__name__)

DEFAULT_NU = 0.5
FD_STEP = 1e-6

_MEASURE_CFG = IntegratorConfig(dt=1e3, method='exact', box_abort=False)


class Segment(NamedTuple):
    start: float
    """Start time of the unit-length rotation window along the base orbit."""
    alpha: float
    r: float
    nu: float
    kappa: float
    """Fraction of the flowbox the rotation is not realized on."""
    alpha0: float
    """Largest admissible amplitude for this segment's C2 budget."""


class RealizationSchedule(NamedTuple):
    base: np.ndarray
    end: np.ndarray
    """Image of ``base`` after ``length_T``."""
    length_T: float
    segments: 'Tuple[Segment, ...]'
    kappa_budget: float
    epsilon: float

    @classmethod
    def empty(cls, base: np.ndarray, epsilon: float = 0.0) -> 'RealizationSchedule':
        """The schedule of length zero at ``base``."""
        base = as_phase(base)
        # noinspection PyArgumentList
        return cls(base, base, 0.0, (), 0.0, epsilon)

    @classmethod
    def single(cls, base: np.ndarray, end: np.ndarray, segment: Segment, epsilon: float) -> 'RealizationSchedule':
        """One rotation over a unit-length orbit segment."""
        # noinspection PyArgumentList
        return cls(as_phase(base), as_phase(end), 1.0, (segment._replace(start=0.0),), segment.kappa,
                   epsilon).validate()

    def validate(self) -> 'RealizationSchedule':
        """
        :raises ScheduleError: Segments overlap or run past the end, an amplitude is above its bound, or the
            kappa budget is exceeded.
        """
        prev_end = 0.0
        kappa = 0.0
        for s in self.segments:
            if s.start < prev_end - 1e-9:
                raise ScheduleError(f'segment at t={s.start!r} overlaps the previous one')
            prev_end = s.start + 1
            if s.alpha > s.alpha0 * (1 + 1e-12):
                raise ScheduleError(f'segment at t={s.start!r}: alpha {s.alpha!r} exceeds alpha0 {s.alpha0!r}')
            kappa += s.kappa
        if prev_end > self.length_T + 1e-9:
            raise ScheduleError(f'segments run to t={prev_end!r}, past the schedule length {self.length_T!r}')
        if kappa > self.kappa_budget + 1e-12:
            raise ScheduleError(f'segments use kappa {kappa!r}, over the budget {self.kappa_budget!r}')
        if not 0 <= self.kappa_budget < 1:
            raise ScheduleError(f'kappa budget must be in [0, 1), got {self.kappa_budget!r}')
        return self

    def angles(self) -> 'List[float]':
        """Rotation angle applied at the start of every unit time step."""
        out = [0.0] * int(ceil(self.length_T - 1e-9))
        for s in self.segments:
            k = int(round(s.start))
            if abs(s.start - k) > 1e-9:
                raise ScheduleError(f'segment start {s.start!r} is not on a unit step')
            out[k] += s.alpha
        return out

    def apply(self, blocks: 'Sequence[np.ndarray]') -> 'List[np.ndarray]':
        """
        The linear flow this schedule realizes over unit cocycle blocks of the base orbit: each block is
        preceded by the rotation of its step.
        """
        angles = self.angles()
        if len(blocks) < len(angles):
            raise ScheduleError(f'{len(angles)} unit blocks needed, got {len(blocks)}')
        return [b @ rotation(a) if a else np.asarray(b) for b, a in zip(blocks, angles + [0.0] * len(blocks))]

    def to_text(self) -> str:
        head = {k: v for k, v in self._asdict().items() if k != 'segments'}
        head['segments'] = len(self.segments)
        body = {f'segment.{i}': tuple(s) for i, s in enumerate(self.segments)}
        return dump_kv(head) + dump_kv(body)

    @classmethod
    def from_text(cls, text: 'Union[str, Iterable[str]]') -> 'RealizationSchedule':
        """:raises ScheduleError: The text is not a schedule."""
        lines = text.splitlines() if isinstance(text, str) else text
        try:
            raw = load_kv(lines)
            count = int(raw.pop('segments'))
            segments = tuple(Segment(*parse_floats(raw.pop(f'segment.{i}'))) for i in range(count))
            if raw.keys() != {'base', 'end', 'length_T', 'kappa_budget', 'epsilon'}:
                raise ValueError(f'unexpected keys {", ".join(sorted(raw))}')
            # noinspection PyArgumentList
            return cls(np.array(parse_floats(raw['base'])), np.array(parse_floats(raw['end'])),
                       float(raw['length_T']), segments, float(raw['kappa_budget']), float(raw['epsilon']))
        except (KeyError, TypeError, ValueError) as e:
            raise ScheduleError(f'malformed schedule: {e}') from e


def concatenate(s1: RealizationSchedule, s2: RealizationSchedule, *, tol: float = 1e-9) -> RealizationSchedule:
    """
    Run ``s2`` after ``s1``. The kappa budgets add up; the C2 budget is the larger of the two.

    :raises ScheduleError: ``s2`` does not start where ``s1`` ends, or the budgets sum to 1 or more.
    """
    if not np.allclose(s1.end, s2.base, rtol=0, atol=tol):
        raise ScheduleError(f'schedule starting at {s2.base} does not continue one ending at {s1.end}')
    kappa = s1.kappa_budget + s2.kappa_budget
    if kappa >= 1:
        raise ScheduleError(f'kappa budgets sum to {kappa!r}, which is not below 1')
    shifted = tuple(s._replace(start=s.start + s1.length_T) for s in s2.segments)
    # noinspection PyArgumentList
    return RealizationSchedule(s1.base, s2.end, s1.length_T + s2.length_T, s1.segments + shifted, kappa,
                               max(s1.epsilon, s2.epsilon)).validate()


def _base_flow(sys: 'HamiltonianSystem', y: np.ndarray, t: float) -> 'Tuple[np.ndarray, np.ndarray]':
    if sys.exact_flow is not None:
        return sys.exact_flow(y, t)
    state = integrate_tangent(sys, y, t, IntegratorConfig(dt=1e-3, method='gauss2', box_abort=False))
    return state.y, state.F


def _orbit_samples(chart: 'FlowboxChart', profile: 'BumpProfile', n: int = 101) -> np.ndarray:
    z = np.zeros((n, 4))
    z[:, 0] = np.linspace(-0.05, 1.05 * profile.rho_bar, n)
    return np.array([chart.g_inv(p) for p in z])


def realized_system(base: 'HamiltonianSystem', x: np.ndarray, alpha: float, r: float, nu: float = DEFAULT_NU,
                    cfg: 'Optional[IntegratorConfig]' = None, *,
                    universal: 'Tuple[float, float, float]' = DEFAULT_UNIVERSAL,
                    chart: 'Optional[FlowboxChart]' = None) -> HamiltonianSystem:
    """
    ``H - alpha * B(g(m))`` where ``g`` is a flowbox chart at ``x`` and ``B`` the bump of radius ``r``.

    Points further than ``4 r`` from the chart image of the orbit segment are never pushed through the chart;
    there the system is the base system. The exact flow conjugates the closed-form model flow by the chart and
    falls back to the base flow for orbits that miss the tube.

    :param chart: A chart at ``x`` to reuse. Built without certification when not given.
    """
    x = as_phase(x)
    profile = build_bumps(r, nu, universal, alpha)
    if chart is None:
        chart = build_chart(base, x, r, cfg, n=0)
    support = profile.support
    reach = 4 * r
    samples = _orbit_samples(chart, profile)
    reach += float(np.max(np.linalg.norm(np.diff(samples, axis=0), axis=1)))

    def coords(m):
        if alpha == 0 or not near(m):
            return None
        try:
            z = chart.g(m)
        except ChartError:
            return None
        return z if support.contains(z) else None

    def H(m):
        m = as_phase(m)
        z = coords(m)
        if z is None:
            return base.energy(m)
        B, _, _ = bump_terms(profile, z)
        return base.energy(m) - alpha * B[0]

    def grad(m):
        m = as_phase(m)
        z = coords(m)
        if z is None:
            return base.gradient(m)
        _, gB, _ = bump_terms(profile, z)
        return base.gradient(m) - alpha * (chart.differential(m).T @ gB[0])

    def hess(m):
        m = as_phase(m)
        if coords(m) is None:
            return base.hessian(m)
        return fd_hessian(grad, m)

    def near(m):
        return np.min(np.linalg.norm(samples - m, axis=1)) <= reach

    def exact_flow(y, t):
        y = as_phase(y)
        if alpha == 0:
            return _base_flow(base, y, t)
        if not near(y):
            end, F = _base_flow(base, y, t)
            for s in np.linspace(0, t, 9)[1:-1]:
                if near(_base_flow(base, y, s)[0]):
                    raise ValidityError(f'orbit of {y} enters the flowbox at t={s!r}')
            if near(end):
                raise ValidityError(f'orbit of {y} ends inside the flowbox')
            return end, F
        try:
            z = chart.g(y)
        except ChartError:
            return _base_flow(base, y, t)
        lo, hi = sorted((z[0], z[0] + t))
        if np.hypot(z[1], z[3]) >= r or abs(z[2]) >= r or hi <= 0 or lo >= profile.rho_bar:
            return _base_flow(base, y, t)

        def conjugated(p):
            return chart.g_inv(closed_form_flow(profile, chart.g(p), t))

        end = chart.g_inv(closed_form_flow(profile, z, t))
        cols = []
        for i in range(4):
            e = np.zeros(4)
            e[i] = FD_STEP
            cols.append((conjugated(y + e) - conjugated(y - e)) / (2 * FD_STEP))
        return end, np.column_stack(cols)

    name = f'realized({base.name},{":".join(format_value(v) for v in x)},{alpha!r},{r!r})'
    return HamiltonianSystem(name, H, grad, hess, domain=base.domain, crit_threshold=base.crit_threshold,
                             exact_flow=exact_flow)


def check_flowbox_orbit(sys: 'HamiltonianSystem', x: np.ndarray, r: float, T: float = 1.0,
                        cfg: 'Optional[IntegratorConfig]' = None) -> float:
    """
    Smallest distance between points of the orbit segment ``[0, T]`` of ``x`` that are at least
    ``max(0.1, 4 r / |X_H(x)|)`` apart in time.

    :raises FlowboxOverlapError: The distance is not above ``2 r``, so the flowbox would overlap itself or the
        orbit is periodic with a short period.
    """
    x = as_phase(x)
    if cfg is None:
        cfg = chart_config(sys)
        if cfg.method == 'exact':
            cfg = cfg._replace(dt=0.01)
    orbit = integrate(sys, x, T, cfg)
    speed = float(np.linalg.norm(J @ sys.gradient(x)))
    gap = max(0.1, 4 * r / speed) if speed > 0 else T
    times = orbit.times
    pts = orbit.points
    best = float('inf')
    for i in range(len(pts)):
        far = np.abs(times - times[i]) >= gap
        if far.any():
            best = min(best, float(np.min(np.linalg.norm(pts[far] - pts[i], axis=1))))
    if best <= 2 * r:
        raise FlowboxOverlapError(best, r)
    logger.debug('orbit of %s separated by %r over T=%r', x, best, T)
    return best


def _transport_factors(chart: 'FlowboxChart', profile: 'BumpProfile', n: int,
                       rng: 'np.random.Generator') -> 'Tuple[float, float]':
    """Largest norms of the first and second chart derivatives over points of the support tube."""
    r = profile.r
    rho = r * np.sqrt(rng.uniform(0, 1, n))
    theta = rng.uniform(0, 2 * pi, n)
    Z = np.column_stack([rng.uniform(0, profile.rho_bar, n), rho * np.cos(theta), rng.uniform(-r, r, n),
                         rho * np.sin(theta)])
    # the differentials themselves carry rounding of about 1e-11
    h = 0.05 * r
    d1 = 0.0
    d2 = 0.0
    for z in Z:
        m = chart.g_inv(z)
        d1 = max(d1, float(np.linalg.norm(chart.differential(m), 2)))
        second = []
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            second.append((chart.differential(m + e) - chart.differential(m - e)) / (2 * h))
        d2 = max(d2, float(np.sqrt(np.sum(np.square(second)))))
    return d1, d2


def _check(bound: str, value: float, limit: float):
    if value > limit + 1e-12 * (1 + abs(limit)):
        raise CertificateError(bound, value, limit)


def realize_rotation(sys: 'HamiltonianSystem', x: np.ndarray, alpha: float, r: float, epsilon: float,
                     cfg: 'Optional[IntegratorConfig]' = None, *, nu: float = DEFAULT_NU,
                     universal: 'Tuple[float, float, float]' = DEFAULT_UNIVERSAL, n_chart: int = 1000,
                     n_disk: int = 16, n_transport: int = 32, gamma: float = 1e-2, kappa: float = 0.1,
                     grid: int = DEFAULT_CERTIFY_GRID, seed: int = 0,
                     strict: bool = True) -> 'Tuple[HamiltonianSystem, PerturbationCertificate]':
    """
    Realize a rotation by ``alpha`` of the transversal cocycle over the unit orbit segment from ``x``.

    The model perturbation is certified as in :func:`hamflow.perturb.certify` and its distances are carried
    through the chart with the measured norms of its first two derivatives. The rotation error at a disk point
    ``y`` is ``|Phi(y) - Phi_H(y) R_alpha|`` for the time-one transversal maps of the realized and of the base
    system; points with error above ``gamma`` count towards ``kappa_fraction``.

    :param n_chart: Samples for the chart certificate.
    :param n_disk: Disk points for the rotation error.
    :param n_transport: Tube points for the chart derivative norms.
    :param kappa: Largest accepted ``kappa_fraction``.
    :raises FlowboxOverlapError: The unit orbit segment comes back near itself.
    :raises CertificateError: The transported C2 distance is above ``c_u * epsilon`` or too many disk points are
        bad (``strict`` only).
    """
    x = as_phase(x)
    rng = np.random.default_rng(seed)
    check_flowbox_orbit(sys, x, r)
    chart = build_chart(sys, x, r, cfg, n=n_chart, seed=seed)
    profile = build_bumps(r, nu, universal, alpha)
    model = certify(profile, epsilon, grid, seed=seed, strict=False)
    realized = realized_system(sys, x, alpha, r, nu, cfg, universal=universal, chart=chart)

    d1, d2 = _transport_factors(chart, profile, n_transport, rng)
    logger.debug('chart derivative norms on the tube: %r, %r', d1, d2)

    disk_radius = nu * r / 2
    rho = disk_radius * np.sqrt(rng.uniform(0, 1, n_disk))
    theta = rng.uniform(0, 2 * pi, n_disk)
    base_cfg = chart_config(sys)
    target = rotation(alpha)
    errors = []
    for a, b in zip(rho * np.cos(theta), rho * np.sin(theta)):
        y = chart.g_inv(np.array([0.0, a, 0.0, b]))
        try:
            Phi = transversal_cocycle(realized, y, 1.0, _MEASURE_CFG).Phi
        except ValidityError as e:
            logger.debug('no closed form at %s: %s', y, e)
            errors.append(float('inf'))
            continue
        ref = transversal_cocycle(sys, y, 1.0, base_cfg).Phi
        errors.append(float(np.linalg.norm(Phi - ref @ target, 2)))
    rotation_error = max(errors) if errors else 0.0
    kappa_fraction = sum(e > gamma for e in errors) / len(errors) if errors else 0.0

    cert = model._replace(
        c1=d1 * model.c1, c2=d1 ** 2 * model.c2 + d2 * model.c1, c1_bound=d1 * model.c1_bound,
        c2_bound=d1 ** 2 * model.c2_bound + d2 * model.c1_bound, rotation_error=rotation_error, gamma=gamma,
        kappa_fraction=kappa_fraction, disk_radius=disk_radius,
    )
    logger.info('realized rotation at %s: C2 distance %r, rotation error %r, kappa fraction %r', x, cert.c2_bound,
                rotation_error, kappa_fraction)
    if strict:
        _check('transported C2', cert.c2_bound, model.universal_constant * epsilon)
        _check('kappa fraction', kappa_fraction, kappa)
    return realized, cert


def schedule_from_certificate(sys: 'HamiltonianSystem', x: np.ndarray,
                              cert: 'PerturbationCertificate') -> RealizationSchedule:
    """The unit-length schedule a realization certificate stands for."""
    x = as_phase(x)
    end, _ = _base_flow(sys, x, 1.0)
    profile = build_bumps(cert.r, cert.nu, (cert.xi, cert.xi_prime, cert.rho_bar), cert.alpha)
    # noinspection PyArgumentList
    segment = Segment(0.0, cert.alpha, cert.r, cert.nu, cert.kappa_fraction, alpha0(profile, cert.epsilon))
    return RealizationSchedule.single(x, end, segment, cert.epsilon)
