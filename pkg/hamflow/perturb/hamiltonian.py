# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from logging import getLogger
from math import atan2, cos, hypot, sin
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad

from ..core.system import HamiltonianSystem
from ..util import as_phase
from .common import ValidityError

if TYPE_CHECKING:
    from typing import Tuple

    from .bumps import BumpProfile

__all__ = ['bump_terms', 'build_perturbed_hamiltonian', 'closed_form_flow', 'closed_form_differential']

logger = getLogger(__name__)


def bump_terms(profile: 'BumpProfile', Y: np.ndarray) -> 'Tuple[np.ndarray, np.ndarray, np.ndarray]':
    """
    The bump ``B = ell(y1) * ell_tilde(y3) * phi(rho)`` with its gradient and Hessian, for the rows of ``Y``.

    The perturbed Hamiltonian is ``y3 - alpha * B``.

    :return: Arrays of shape (N,), (N, 4) and (N, 4, 4).
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    y1, y2, y3, y4 = Y.T
    rho = np.hypot(y2, y4)

    l0, l1, l2 = (profile.ell(y1, k) for k in range(3))
    t0, t1, t2 = (profile.ell_tilde(y3, k) for k in range(3))
    p0 = profile.phi(rho)
    pr = profile.phi_over_rho(rho)
    q = profile.phi_q(rho)

    B = l0 * t0 * p0

    grad = np.empty_like(Y)
    grad[:, 0] = l1 * t0 * p0
    grad[:, 1] = l0 * t0 * pr * y2
    grad[:, 2] = l0 * t1 * p0
    grad[:, 3] = l0 * t0 * pr * y4

    hess = np.empty((len(Y), 4, 4))
    hess[:, 0, 0] = l2 * t0 * p0
    hess[:, 2, 2] = l0 * t2 * p0
    hess[:, 0, 2] = hess[:, 2, 0] = l1 * t1 * p0
    for a, ya in ((1, y2), (3, y4)):
        hess[:, 0, a] = hess[:, a, 0] = l1 * t0 * pr * ya
        hess[:, 2, a] = hess[:, a, 2] = l0 * t1 * pr * ya
    lt = l0 * t0
    hess[:, 1, 1] = lt * (pr + q * y2 * y2)
    hess[:, 3, 3] = lt * (pr + q * y4 * y4)
    hess[:, 1, 3] = hess[:, 3, 1] = lt * q * y2 * y4
    return B, grad, hess


def closed_form_flow(profile: 'BumpProfile', y0: np.ndarray, t: float) -> np.ndarray:
    """
    Exact flow of the perturbed Hamiltonian for start points in the flat core.

    Inside ``rho < r*nu`` with ``ell_tilde = 1`` along the orbit the flow is a y1-translation combined with a
    rotation of (y2, y4) by ``alpha * int_0^t ell(y1 + s) ds``; y3 moves by ``alpha * phi(rho) * (ell(y1 + t) -
    ell(y1))`` and the radius is invariant.

    :raises ValidityError: The orbit may leave the region where this holds.
    """
    y1, y2, y3, y4 = as_phase(y0)
    rho = hypot(y2, y4)
    alpha = profile.alpha
    if rho >= profile.inner:
        raise ValidityError(f'radius {rho!r} is outside the flat core {profile.inner!r}')
    if abs(y3) + alpha * rho ** 2 / 2 * profile.ell0 >= profile.inner:
        raise ValidityError(f'y3={y3!r} may leave the flat core {profile.inner!r} along the orbit')
    if t == 0:
        return np.array([y1, y2, y3, y4])

    lo, hi = sorted((y1, y1 + t))
    bounds = [p for p in (profile.xi, profile.xi_prime, profile.rho_bar) if lo < p < hi]
    mass, _ = quad(profile.ell, lo, hi, points=bounds or None, epsabs=1e-14, epsrel=1e-13, limit=200)
    turn = alpha * (mass if t > 0 else -mass)
    theta = atan2(y4, y2)
    phi = rho ** 2 / 2
    return np.array([
        y1 + t,
        rho * cos(theta + turn),
        y3 + alpha * phi * (profile.ell(y1 + t) - profile.ell(y1)),
        rho * sin(theta + turn),
    ])


def closed_form_differential(profile: 'BumpProfile', y0: np.ndarray, t: float, h: float = 1e-6) -> np.ndarray:
    """Central-difference differential of :func:`closed_form_flow`."""
    y0 = as_phase(y0)
    cols = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        cols.append((closed_form_flow(profile, y0 + e, t) - closed_form_flow(profile, y0 - e, t)) / (2 * h))
    return np.column_stack(cols)


def build_perturbed_hamiltonian(profile: 'BumpProfile') -> HamiltonianSystem:
    """
    The system ``H = y3 - alpha * ell(y1) * ell_tilde(y3) * phi(rho)``, equal to ``y3`` outside the support tube.

    Its exact flow is the translation along y1 for orbits that never meet the bump (``rho >= r`` or
    ``|y3| >= r``) and :func:`closed_form_flow` in the flat core; anywhere else it raises
    :class:`ValidityError`.
    """
    alpha = profile.alpha
    r = profile.r

    def H(y):
        B, _, _ = bump_terms(profile, y)
        return y[2] - alpha * B[0]

    def grad(y):
        _, g, _ = bump_terms(profile, y)
        out = -alpha * g[0]
        out[2] += 1.0
        return out

    def hess(y):
        _, _, h = bump_terms(profile, y)
        return -alpha * h[0]

    def exact_flow(y, t):
        y = as_phase(y)
        if alpha == 0 or hypot(y[1], y[3]) >= r or abs(y[2]) >= r:
            return y + np.array([t, 0., 0., 0.]), np.eye(4)
        return closed_form_flow(profile, y, t), closed_form_differential(profile, y, t)

    name = f'bump-rotation({profile.alpha!r},{profile.r!r},{profile.nu!r})'
    return HamiltonianSystem(name, H, grad, hess, exact_flow=exact_flow)
