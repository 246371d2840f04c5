# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Smooth bump profiles for the local rotation perturbation.

Three profiles are combined: ``ell`` in the flow coordinate y1 (a plateau of height ``ell0`` on
``[xi, xi_prime]``, zero outside ``(0, rho_bar)``, unit integral), ``ell_tilde`` in the energy coordinate y3
(one on ``|s| <= r*nu``, zero for ``|s| >= r``) and ``phi`` in the radius ``rho = sqrt(y2^2 + y4^2)``
(``rho^2/2`` for ``rho <= r*nu``, zero for ``rho >= r``). All of them are built from one C-infinity smoothstep.
"""

from logging import getLogger
from math import isfinite
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from .common import ParameterError

if TYPE_CHECKING:
    from typing import Dict, Tuple, Union

    ArrayLike = Union[float, np.ndarray]

__all__ = ['DEFAULT_UNIVERSAL', 'NORM_GRID', 'smoothstep', 'Tube', 'BumpProfile', 'build_bumps']

logger = getLogger(__name__)

DEFAULT_UNIVERSAL = (0.2, 0.6, 0.9)
NORM_GRID = 10_000

# below this distance from 0 or 1 the smoothstep is flat to double precision
_EDGE = 1e-3


def smoothstep(x: 'ArrayLike', order: int = 0) -> 'ArrayLike':
    """
    The C-infinity step ``s(x) = e^(-1/x) / (e^(-1/x) + e^(-1/(1-x)))``: zero for ``x <= 0``, one for ``x >= 1``.

    :param x: Scalar or array.
    :param order: Derivative order, 0 to 3.
    """
    if not 0 <= order <= 3:
        raise ValueError(f'derivative order must be between 0 and 3, got {order}')
    arr = np.asarray(x, dtype=np.float64)
    shape = arr.shape
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    if order == 0:
        out[arr >= 1 - _EDGE] = 1.0

    inside = (arr > _EDGE) & (arr < 1 - _EDGE)
    u = arr[inside]
    g = 1 / u - 1 / (1 - u)
    L = expit(-g)
    if order == 0:
        out[inside] = L
    else:
        # derivatives of expit(-g) with respect to g, then the chain rule through g(u)
        d1 = -L * (1 - L)
        g1 = -1 / u ** 2 - 1 / (1 - u) ** 2
        if order == 1:
            out[inside] = d1 * g1
        else:
            d2 = L * (1 - L) * (1 - 2 * L)
            g2 = 2 / u ** 3 - 2 / (1 - u) ** 3
            if order == 2:
                out[inside] = d2 * g1 ** 2 + d1 * g2
            else:
                d3 = -L * (1 - L) * (1 - 6 * L + 6 * L ** 2)
                g3 = -6 / u ** 4 - 6 / (1 - u) ** 4
                out[inside] = d3 * g1 ** 3 + 3 * d2 * g1 * g2 + d1 * g3

    if not shape:
        return float(out[0])
    return out.reshape(shape)


class Tube(NamedTuple):
    """The set ``a < y1 < b, rho < c, |y3| < c``."""

    a: float
    b: float
    c: float

    def contains(self, Y: np.ndarray) -> 'Union[bool, np.ndarray]':
        """Membership for a point or for the rows of an N x 4 array."""
        Y = np.asarray(Y, dtype=np.float64)
        rho = np.hypot(Y[..., 1], Y[..., 3])
        inside = (self.a < Y[..., 0]) & (Y[..., 0] < self.b) & (rho < self.c) & (np.abs(Y[..., 2]) < self.c)
        if inside.ndim == 0:
            return bool(inside)
        return inside


def _binomial_product(a, b, order: int):
    """Leibniz rule: derivative of order ``order`` of a product given lists of derivatives of both factors."""
    coeffs = ((1,), (1, 1), (1, 2, 1), (1, 3, 3, 1))[order]
    return sum(c * a[k] * b[order - k] for k, c in enumerate(coeffs))


class BumpProfile(NamedTuple):
    xi: float
    xi_prime: float
    rho_bar: float
    r: float
    nu: float
    alpha: float
    ell0: float
    """Plateau height of ``ell``, fixed by the unit integral."""
    universal_constant: float
    """Largest ratio of a measured norm to its scaling bound, see :meth:`norm_ratios`."""

    @property
    def inner(self) -> float:
        """Inner radius ``r * nu`` where the profiles are exactly flat."""
        return self.r * self.nu

    @property
    def slope(self) -> float:
        """Inverse width ``1 / ((1 - nu) r)`` of the transition annulus."""
        return 1 / ((1 - self.nu) * self.r)

    @property
    def support(self) -> Tube:
        # noinspection PyArgumentList
        return Tube(0.0, self.rho_bar, self.r)

    @property
    def validity(self) -> Tube:
        """The tube where the closed-form flow applies."""
        # noinspection PyArgumentList
        return Tube(0.0, 1.0, self.inner)

    def with_alpha(self, alpha: float) -> 'BumpProfile':
        if not (isfinite(alpha) and alpha >= 0):
            raise ParameterError(f'alpha must be a non-negative real, got {alpha!r}')
        return self._replace(alpha=alpha)

    def ell(self, y1: 'ArrayLike', order: int = 0) -> 'ArrayLike':
        """The y1 profile or one of its derivatives."""
        return self.ell0 * _ell_shape(self.xi, self.xi_prime, self.rho_bar, y1, order)

    def ell_tilde(self, s: 'ArrayLike', order: int = 0) -> 'ArrayLike':
        """The y3 profile or one of its derivatives."""
        s = np.asarray(s, dtype=np.float64)
        k = self.slope
        u = (np.abs(s) - self.inner) * k
        if order == 0:
            out = 1 - smoothstep(u)
        else:
            out = -smoothstep(u, order) * k ** order
            if order % 2:
                out = out * np.sign(s)
        return out if np.ndim(out) else float(out)

    def _w(self, rho: 'ArrayLike', order: int = 0) -> 'ArrayLike':
        k = self.slope
        u = (np.asarray(rho, dtype=np.float64) - self.inner) * k
        if order == 0:
            return 1 - smoothstep(u)
        return -smoothstep(u, order) * k ** order

    def phi(self, rho: 'ArrayLike', order: int = 0) -> 'ArrayLike':
        """The radial profile ``rho^2/2 * w(rho)`` or one of its derivatives in ``rho``."""
        rho = np.asarray(rho, dtype=np.float64)
        w = [self._w(rho, k) for k in range(order + 1)]
        # derivatives of rho^2/2
        p = (rho ** 2 / 2, rho, np.ones_like(rho), np.zeros_like(rho))
        out = _binomial_product(p, w, order)
        return out if np.ndim(out) else float(out)

    def phi_over_rho(self, rho: 'ArrayLike') -> 'ArrayLike':
        """``phi'(rho) / rho``, smooth through the axis."""
        rho = np.asarray(rho, dtype=np.float64)
        return self._w(rho) + rho / 2 * self._w(rho, 1)

    def phi_q(self, rho: 'ArrayLike') -> 'ArrayLike':
        """``(phi'' - phi'/rho) / rho^2``, the coefficient of ``y y^T`` in the Cartesian Hessian of ``phi``."""
        rho = np.asarray(rho, dtype=np.float64)
        w1 = self._w(rho, 1)
        safe = np.where(rho > 0, rho, 1.0)
        # w' vanishes on rho <= r*nu, which includes the axis
        return np.where(rho > self.inner, 1.5 * w1 / safe, 0.0) + 0.5 * self._w(rho, 2)

    def sup_norms(self, n: int = NORM_GRID) -> 'Dict[str, float]':
        """Sup norms of the profiles and their derivatives measured on grids of ``n`` points."""
        y1 = np.linspace(0, self.rho_bar, n)
        s = np.linspace(-self.r, self.r, n)
        rho = np.linspace(0, self.r, n)
        norms = {}
        for k in range(4):
            norms[f'ell{k}'] = float(np.max(np.abs(self.ell(y1, k))))
            norms[f'ell_tilde{k}'] = float(np.max(np.abs(self.ell_tilde(s, k))))
            norms[f'phi{k}'] = float(np.max(np.abs(self.phi(rho, k))))
        norms['phi_over_rho'] = float(np.max(np.abs(self.phi_over_rho(rho))))
        return norms

    def envelopes(self, norms: 'Dict[str, float]' = None) -> 'Tuple[float, float]':
        """
        Upper envelopes of the first and second derivatives of the bump product ``ell * ell_tilde * phi``, from
        products of one-dimensional sup norms.
        """
        n = self.sup_norms() if norms is None else norms
        l0, l1, l2 = n['ell0'], n['ell1'], n['ell2']
        t0, t1, t2 = n['ell_tilde0'], n['ell_tilde1'], n['ell_tilde2']
        p0, p1 = n['phi0'], n['phi1']
        p2 = max(n['phi2'], n['phi_over_rho'])
        e1 = float(np.sqrt((l1 * t0 * p0) ** 2 + (l0 * t1 * p0) ** 2 + (l0 * t0 * p1) ** 2))
        # coordinates (y1, y3, rho); entrywise bounds of the Hessian, so the spectral norm bounds it too
        m = np.array([
            [l2 * t0 * p0, l1 * t1 * p0, l1 * t0 * p1],
            [l1 * t1 * p0, l0 * t2 * p0, l0 * t1 * p1],
            [l1 * t0 * p1, l0 * t1 * p1, l0 * t0 * p2],
        ])
        e2 = float(np.linalg.norm(m, 2))
        return e1, e2

    def stated_bounds(self) -> 'Dict[str, float]':
        """The scaling bounds every measured norm is compared against."""
        r, nu = self.r, self.nu
        return {
            'ell_tilde1': 2 / ((1 - nu) * r),
            'ell_tilde2': 4 / ((1 - nu) * r) ** 2,
            'phi0': (r * nu) ** 2,
            'phi1': 2 * r * nu ** 2 / (1 - nu),
            'phi2': (2 * nu / (1 - nu)) ** 2,
            'c1_envelope': r * nu / (1 - nu),
            'c2_envelope': 1 / (1 - nu) ** 2,
        }

    def norm_ratios(self) -> 'Dict[str, float]':
        """Measured norm over stated bound for every entry of :meth:`stated_bounds`."""
        norms = self.sup_norms()
        e1, e2 = self.envelopes(norms)
        measured = dict(norms, c1_envelope=e1, c2_envelope=e2)
        return {k: measured[k] / v for k, v in self.stated_bounds().items()}


def _ell_shape(xi: float, xi_prime: float, rho_bar: float, y1: 'ArrayLike', order: int) -> 'ArrayLike':
    y1 = np.asarray(y1, dtype=np.float64)
    width = rho_bar - xi_prime
    up = [smoothstep(y1 / xi, k) / xi ** k for k in range(order + 1)]
    down = [1 - smoothstep((y1 - xi_prime) / width)]
    down += [-smoothstep((y1 - xi_prime) / width, k) / width ** k for k in range(1, order + 1)]
    out = _binomial_product(up, down, order)
    return out if np.ndim(out) else float(out)


def build_bumps(r: float, nu: float, universal: 'Tuple[float, float, float]' = DEFAULT_UNIVERSAL,
                alpha: float = 0.0) -> BumpProfile:
    """
    Build the three profiles for a tube of radius ``r`` with flat core ``r * nu``.

    The plateau height is fixed by integrating the unnormalized y1 profile; the universal constant is measured on
    :data:`NORM_GRID`-point grids.

    :param r: Tube radius, in (0, 1).
    :param nu: Core fraction, in (0, 1).
    :param universal: ``(xi, xi_prime, rho_bar)`` with ``0 < xi < xi_prime < rho_bar < 1``.
    :param alpha: Rotation amplitude.
    :raises ParameterError: Any parameter is out of range.
    """
    xi, xi_prime, rho_bar = universal
    if not all(isfinite(v) for v in (r, nu, xi, xi_prime, rho_bar, alpha)):
        raise ParameterError('bump parameters must be finite')
    if not 0 < r < 1:
        raise ParameterError(f'r must be in (0, 1), got {r!r}')
    if not 0 < nu < 1:
        raise ParameterError(f'nu must be in (0, 1), got {nu!r}')
    if not 0 < xi < xi_prime < rho_bar < 1:
        raise ParameterError(f'need 0 < xi < xi_prime < rho_bar < 1, got {universal!r}')
    if alpha < 0:
        raise ParameterError(f'alpha must be non-negative, got {alpha!r}')

    def shape(y):
        return _ell_shape(xi, xi_prime, rho_bar, y, 0)

    opts = dict(points=(xi, xi_prime, rho_bar), epsabs=1e-14, epsrel=1e-13, limit=200)
    mass, _ = quad(shape, 0, 1, **opts)
    ell0 = 1 / mass
    residual = abs(quad(lambda y: ell0 * shape(y), 0, 1, **opts)[0] - 1)
    if residual > 1e-10:
        raise ParameterError(f'could not normalize the y1 profile (residual {residual:.3e})')

    # noinspection PyArgumentList
    profile = BumpProfile(float(xi), float(xi_prime), float(rho_bar), float(r), float(nu), float(alpha), ell0, 0.0)
    ratios = profile.norm_ratios()
    c_u = max(ratios.values())
    logger.debug('bump profile r=%r nu=%r: ell0=%r, norm ratios %s', r, nu, ell0, ratios)
    return profile._replace(universal_constant=c_u)
