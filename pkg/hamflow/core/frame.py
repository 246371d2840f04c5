# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .symplectic import J, omega0
from .system import CoreError

if TYPE_CHECKING:
    from .system import HamiltonianSystem

__all__ = ['RegularityError', 'TransversalFrame', 'transversal_frame']


class RegularityError(CoreError):
    """The point is too close to a critical point of H to define the normal bundle."""

    def __init__(self, norm: float, threshold: float):
        super().__init__(norm, threshold)

    @property
    def norm(self) -> float:
        return self.args[0]

    def __str__(self):
        return f'gradient norm {self.args[0]:.3e} below regularity threshold {self.args[1]:.3e}'


class TransversalFrame(NamedTuple):
    """Orthonormal frame of the transversal fiber at a regular point."""

    base: np.ndarray
    """Point the frame is attached to."""
    u1: np.ndarray
    u2: np.ndarray
    xdir: np.ndarray
    """Unit vector along X_H(base)."""
    gdir: np.ndarray
    """Unit vector along grad H(base)."""

    @property
    def basis(self) -> np.ndarray:
        """4x2 matrix with columns u1, u2."""
        return np.column_stack((self.u1, self.u2))

    @property
    def normal_basis(self) -> np.ndarray:
        """4x3 matrix with columns u1, u2, gdir spanning the normal fiber."""
        return np.column_stack((self.u1, self.u2, self.gdir))

    @property
    def area(self) -> float:
        """omega0(u1, u2)."""
        return omega0(self.u1, self.u2)

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Components of a vector along (u1, u2)."""
        return np.array([self.u1 @ v, self.u2 @ v])

    def lift(self, c: np.ndarray) -> np.ndarray:
        """Vector c[0] * u1 + c[1] * u2."""
        return c[0] * self.u1 + c[1] * self.u2

    def matches(self, other: 'TransversalFrame', tol: float = 1e-9) -> bool:
        return bool(np.allclose(self.base, other.base, rtol=0, atol=tol)
                    and np.allclose(self.u1, other.u1, rtol=0, atol=tol)
                    and np.allclose(self.u2, other.u2, rtol=0, atol=tol))


def transversal_frame(sys: 'HamiltonianSystem', y: np.ndarray) -> TransversalFrame:
    """
    Build the deterministic frame of the transversal fiber at ``y``.

    u1 is the normalized projection of the coordinate axis with the largest projection (smallest index on ties)
    and u2 completes it with omega0(u1, u2) > 0.

    :raises RegularityError: The gradient or the Hamiltonian field is below the regularity cutoff.
    """
    grad = sys.gradient(y)
    field = J @ grad
    g_norm = float(np.linalg.norm(grad))
    x_norm = float(np.linalg.norm(field))
    if min(g_norm, x_norm) < sys.crit_threshold:
        raise RegularityError(min(g_norm, x_norm), sys.crit_threshold)

    xdir = field / x_norm
    gdir = grad / g_norm
    # grad and X_H are orthogonal for the Euclidean metric; Gram-Schmidt keeps the projector exact anyway
    q2 = gdir - (gdir @ xdir) * xdir
    q2 /= np.linalg.norm(q2)
    proj = np.eye(4) - np.outer(xdir, xdir) - np.outer(q2, q2)

    norms = np.linalg.norm(proj, axis=0)
    k = int(np.flatnonzero(norms >= norms.max() - 1e-12)[0])
    u1 = proj[:, k] / norms[k]

    u2 = proj @ (-J @ u1)
    u2 -= (u2 @ u1) * u1
    u2 /= np.linalg.norm(u2)
    if omega0(u1, u2) < 0:
        u2 = -u2

    # noinspection PyArgumentList
    return TransversalFrame(np.array(y, dtype=np.float64), u1, u2, xdir, gdir)
