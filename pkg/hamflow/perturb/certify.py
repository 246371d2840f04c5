# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Certification of the bump-rotation perturbation.

A :class:`PerturbationCertificate` records how far ``H = y3 - alpha * B`` is from the model ``y3`` in the
C0, C1 and C2 norms, whether the perturbation is supported in the tube and flat on its end slices, and how well
the time-one transversal map on the inner disk matches the rotation by ``alpha``.
"""

from logging import getLogger
from math import cos, pi, sin, sqrt
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from ..fileio import write_table
from ..flow import IntegratorConfig, integrate_tangent
from ..util import dump_kv, load_record, rotation
from .bumps import DEFAULT_UNIVERSAL, build_bumps
from .common import CertificateError, PerturbationError
from .hamiltonian import bump_terms, build_perturbed_hamiltonian, closed_form_differential

if TYPE_CHECKING:
    from typing import Iterable, List, Optional, Sequence, Tuple, Union

    from fs.base import FS

    from ..common import FilePathOrObject
    from .bumps import BumpProfile

__all__ = ['DEFAULT_CERTIFY_GRID', 'MAX_UNIVERSAL_CONSTANT', 'GRID_COLUMNS', 'PerturbationCertificate',
           'DistanceEstimate', 'alpha0', 'distance_estimates', 'certify', 'c3_blowup_probe', 'grid_report']

logger = getLogger(__name__)

DEFAULT_CERTIFY_GRID = 10_000
MAX_UNIVERSAL_CONSTANT = 8.0
SUPPORT_SAMPLES = 10_000

GRID_COLUMNS = ('y1', 'y2', 'y3', 'y4', 'c0', 'c1', 'c2')

_ROTATION_CFG = IntegratorConfig(dt=1e-3, method='gauss2')


class PerturbationCertificate(NamedTuple):
    c0: float
    c1: float
    c2: float
    c1_bound: float
    """C1 distance including the grid margin; this is the value compared against the envelope."""
    c2_bound: float
    support_ok: bool
    boundary_dx_ok: bool
    rotation_error: float
    alpha0_used: float
    universal_constant: float
    epsilon: float
    xi: float
    xi_prime: float
    rho_bar: float
    ell0: float
    r: float
    nu: float
    alpha: float
    gamma: float
    """Rotation error above which a disk point counts as bad."""
    kappa_fraction: float
    """Fraction of sampled disk points with rotation error above ``gamma``."""
    disk_radius: float

    def to_text(self) -> str:
        return dump_kv(self._asdict())

    @classmethod
    def from_text(cls, text: 'Union[str, Iterable[str]]') -> 'PerturbationCertificate':
        """
        Parse the output of :meth:`to_text`.

        :raises PerturbationError: A field is missing, unknown or malformed.
        """
        lines = text.splitlines() if isinstance(text, str) else text
        try:
            return cls(**load_record(cls, lines))
        except ValueError as e:
            raise PerturbationError(f'malformed certificate: {e}') from e


class DistanceEstimate(NamedTuple):
    c0: float
    c1: float
    c2: float
    c3: float
    c1_bound: float
    c2_bound: float
    spacing: float
    """Half diagonal of a grid cell, the radius the Lipschitz margins are taken over."""


def alpha0(profile: 'BumpProfile', epsilon: float) -> float:
    """
    Largest admissible rotation amplitude for a C2 distance below ``epsilon``.

    This is the smaller of ``epsilon * (1 - nu)^2 / c_u`` and ``2 / (ell0 * r * nu)``; the second keeps the y3
    excursion of orbits from the inner disk within the flat core.
    """
    if not epsilon > 0:
        raise PerturbationError(f'epsilon must be positive, got {epsilon!r}')
    c2_limit = epsilon * (1 - profile.nu) ** 2 / profile.universal_constant
    return min(c2_limit, 2 / (profile.ell0 * profile.inner))


def _certify_grid(profile: 'BumpProfile', grid: int) -> 'Tuple[np.ndarray, float]':
    n = max(4, round((grid / 2) ** (1 / 3)))
    r = profile.r
    y1 = np.linspace(-0.05 * profile.rho_bar, 1.05 * profile.rho_bar, n)
    rho = np.linspace(0, 1.05 * r, n)
    y3 = np.linspace(-1.05 * r, 1.05 * r, n)
    pts = []
    for theta in (0.0, pi / 4):
        a, p, b = np.meshgrid(y1, rho, y3, indexing='ij')
        pts.append(np.column_stack([a.ravel(), (p * cos(theta)).ravel(), b.ravel(), (p * sin(theta)).ravel()]))
    spacing = 0.5 * sqrt((y1[1] - y1[0]) ** 2 + (rho[1] - rho[0]) ** 2 + (y3[1] - y3[0]) ** 2)
    return np.vstack(pts), spacing


def _third_derivatives(profile: 'BumpProfile', Y: np.ndarray, h: float) -> np.ndarray:
    """Central differences of the analytic Hessian of the bump, shape (N, 4, 4, 4)."""
    out = np.empty((len(Y), 4, 4, 4))
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        _, _, hp = bump_terms(profile, Y + e)
        _, _, hm = bump_terms(profile, Y - e)
        out[:, i] = (hp - hm) / (2 * h)
    return out


def _pointwise_norms(profile: 'BumpProfile', Y: np.ndarray) -> 'Tuple[np.ndarray, np.ndarray, np.ndarray]':
    B, grad, hess = bump_terms(profile, Y)
    alpha = profile.alpha
    return alpha * np.abs(B), alpha * np.linalg.norm(grad, axis=1), alpha * np.linalg.norm(hess, ord=2, axis=(1, 2))


def distance_estimates(profile: 'BumpProfile', grid: int = DEFAULT_CERTIFY_GRID) -> DistanceEstimate:
    """
    Grid suprema of ``|H - y3|`` and its first two derivatives over a box around the support tube.

    The bounds add the next derivative's grid supremum times the half cell diagonal, capped by the envelopes
    built from the one-dimensional profile norms.
    """
    if grid < 1000:
        raise PerturbationError(f'the certification grid needs at least 1000 points, got {grid}')
    Y, spacing = _certify_grid(profile, grid)
    d0, d1, d2 = _pointwise_norms(profile, Y)
    h = 1e-3 * (1 - profile.nu) * profile.r
    d3 = profile.alpha * np.sqrt(np.sum(_third_derivatives(profile, Y, h) ** 2, axis=(1, 2, 3)))
    c0, c1, c2, c3 = (float(np.max(d)) for d in (d0, d1, d2, d3))
    e1, e2 = profile.envelopes()
    c1_bound = min(c1 + c2 * spacing, profile.alpha * e1)
    c2_bound = min(c2 + c3 * spacing, profile.alpha * e2)
    logger.debug('distance estimates on %d points: c0=%r c1=%r c2=%r c3=%r', len(Y), c0, c1, c2, c3)
    # noinspection PyArgumentList
    return DistanceEstimate(c0, c1, c2, c3, c1_bound, c2_bound, spacing)


def _outside_support(profile: 'BumpProfile', n: int, rng: 'np.random.Generator') -> np.ndarray:
    r = profile.r
    lower = np.array([-0.5, -2 * r, -2 * r, -2 * r])
    upper = np.array([1.5, 2 * r, 2 * r, 2 * r])
    support = profile.support
    chunks = []
    found = 0
    while found < n:
        Y = rng.uniform(lower, upper, size=(2 * n, 4))
        Y = Y[~support.contains(Y)]
        chunks.append(Y)
        found += len(Y)
    return np.vstack(chunks)[:n]


def _boundary_flatness(profile: 'BumpProfile', rng: 'np.random.Generator', n: int = 1000) -> float:
    r = profile.r
    worst = 0.0
    for y1 in (0.0, profile.rho_bar):
        Y = rng.uniform(-r, r, size=(n, 4))
        Y[:, 0] = y1
        _, _, hess = bump_terms(profile, Y)
        worst = max(worst, profile.alpha * float(np.max(np.abs(hess))))
    return worst


def _disk_points(profile: 'BumpProfile', n: int, rng: 'np.random.Generator') -> 'Tuple[np.ndarray, float]':
    radius = 0.9 * profile.inner
    rho = radius * np.sqrt(rng.uniform(0, 1, n))
    theta = rng.uniform(0, 2 * pi, n)
    zeros = np.zeros(n)
    return np.column_stack([zeros, rho * np.cos(theta), zeros, rho * np.sin(theta)]), radius


def _rotation_errors(profile: 'BumpProfile', points: np.ndarray, cfg: IntegratorConfig) -> 'List[float]':
    sys = build_perturbed_hamiltonian(profile)
    target = rotation(profile.alpha)
    idx = np.ix_((1, 3), (1, 3))
    errors = []
    for y in points:
        F = integrate_tangent(sys, y, 1.0, cfg).F
        block = F[idx]
        reference = closed_form_differential(profile, y, 1.0)[idx]
        err = max(float(np.linalg.norm(block - target, 2)), float(np.linalg.norm(block - reference, 2)))
        logger.debug('rotation error at %s: %r', y, err)
        errors.append(err)
    return errors


def _check(bound: str, value: float, limit: float):
    if value > limit + 1e-12 * (1 + abs(limit)):
        raise CertificateError(bound, value, limit)


def certify(profile: 'BumpProfile', epsilon: float, grid: int = DEFAULT_CERTIFY_GRID, *,
            c_u_max: float = MAX_UNIVERSAL_CONSTANT, rotation_samples: int = 8, rotation_tol: float = 1e-6,
            gamma: float = 1e-2, seed: int = 0, cfg: IntegratorConfig = _ROTATION_CFG,
            strict: bool = True) -> PerturbationCertificate:
    """
    Certify a bump-rotation perturbation against the C2 budget ``epsilon``.

    :param grid: Number of grid points for the distance estimates.
    :param rotation_samples: Points of the inner disk at which the time-one transversal map is integrated.
    :param gamma: Rotation error above which a disk point is counted in ``kappa_fraction``.
    :param strict: Raise on the first violated bound. Otherwise the certificate is returned as measured.
    :raises CertificateError: A bound does not hold; the error names it.
    """
    rng = np.random.default_rng(seed)
    a0 = alpha0(profile, epsilon)
    c_u = profile.universal_constant
    alpha = profile.alpha
    dist = distance_estimates(profile, grid)

    support_value = float(np.max(_pointwise_norms(profile, _outside_support(profile, SUPPORT_SAMPLES, rng))[0]))
    flat_value = _boundary_flatness(profile, rng)

    points, radius = _disk_points(profile, rotation_samples, rng)
    errors = _rotation_errors(profile, points, cfg) if rotation_samples else [0.0]
    rotation_error = max(errors)
    kappa_fraction = sum(e > gamma for e in errors) / len(errors)

    # noinspection PyArgumentList
    cert = PerturbationCertificate(
        dist.c0, dist.c1, dist.c2, dist.c1_bound, dist.c2_bound, support_value == 0.0, flat_value <= 1e-12,
        rotation_error, a0, c_u, epsilon, profile.xi, profile.xi_prime, profile.rho_bar, profile.ell0, profile.r,
        profile.nu, alpha, gamma, kappa_fraction, radius,
    )
    logger.info('perturbation certificate alpha=%r r=%r nu=%r: c1=%r c2=%r rotation error %r',
                alpha, profile.r, profile.nu, cert.c1_bound, cert.c2_bound, rotation_error)

    if strict:
        _check('universal constant', c_u, c_u_max)
        _check('C2 bound', alpha, epsilon * (1 - profile.nu) ** 2 / c_u)
        _check('y3 excursion', alpha, 2 / (profile.ell0 * profile.inner))
        _check('C1 envelope', cert.c1_bound, c_u * alpha * profile.inner / (1 - profile.nu))
        _check('C2 envelope', cert.c2_bound, c_u * alpha / (1 - profile.nu) ** 2)
        _check('C2 distance', cert.c2_bound, epsilon)
        _check('support', support_value, 0.0)
        _check('boundary flatness', flat_value, 1e-12)
        _check('rotation', rotation_error, rotation_tol)
    return cert


def c3_blowup_probe(r_list: 'Sequence[float]', nu: float, alpha: float, *,
                    universal: 'Tuple[float, float, float]' = DEFAULT_UNIVERSAL,
                    resolution: int = 161) -> 'List[Tuple[float, float]]':
    """
    Largest third-order partial derivative of ``H - y3`` for a sequence of tube radii.

    The grid and the difference step both scale with ``r``, so the same relative resolution is used for every
    radius. The values grow like ``alpha / r``.

    :param resolution: Grid points along the radius; y3 and y1 use coarser grids.
    :return: A list of ``(r, c3)``.
    """
    out = []
    for r in r_list:
        profile = build_bumps(r, nu, universal, alpha)
        y1 = np.linspace(0, profile.rho_bar, 11)
        y3 = np.linspace(-r, r, 41)
        rho = np.linspace(0, r, resolution)
        a, b, p = np.meshgrid(y1, y3, rho, indexing='ij')
        zeros = np.zeros(a.size)
        Y = np.column_stack([a.ravel(), p.ravel(), b.ravel(), zeros])
        h = 1e-3 * (1 - nu) * r
        c3 = alpha * float(np.max(np.abs(_third_derivatives(profile, Y, h)))) if alpha else 0.0
        logger.info('third-order norm at r=%r: %r', r, c3)
        out.append((float(r), c3))
    return out


def grid_report(profile: 'BumpProfile', path: 'FilePathOrObject', grid: int = DEFAULT_CERTIFY_GRID, *,
                fs: 'Optional[Union[FS, str]]' = None, fmt: str = 'csv', timestamp: bool = True) -> int:
    """
    Write ``|H - y3|``, the gradient norm and the Hessian norm at every certification grid point.

    :return: The number of rows written.
    """
    Y, _ = _certify_grid(profile, grid)
    d0, d1, d2 = _pointwise_norms(profile, Y)
    rows = [[*y, a, b, c] for y, a, b, c in zip(Y, d0, d1, d2)]
    write_table(path, GRID_COLUMNS, rows, fs=fs, fmt=fmt, timestamp=timestamp)
    return len(rows)
