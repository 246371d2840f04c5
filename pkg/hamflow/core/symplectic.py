# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
The canonical symplectic structure on R^4.

Coordinates are (y1, y2, y3, y4) and the form is omega0 = dy1^dy3 + dy2^dy4, so y1 pairs with y3 and y2 pairs with
y4. With ``J`` below, omega0(v, w) = v^T J w and the Hamiltonian vector field is X_H = J grad H.
"""

import numpy as np

__all__ = ['J', 'omega0', 'symplectic_residual', 'is_symplectic']

# zero-indexed: J[0, 2] = J[1, 3] = 1, J[2, 0] = J[3, 1] = -1
J = np.array([
    [0., 0., 1., 0.],
    [0., 0., 0., 1.],
    [-1., 0., 0., 0.],
    [0., -1., 0., 0.],
])
J.setflags(write=False)


def omega0(v: np.ndarray, w: np.ndarray) -> float:
    """Evaluate the symplectic form on two tangent vectors."""
    return float(v @ J @ w)


def symplectic_residual(F: np.ndarray) -> float:
    """Spectral norm of F^T J F - J."""
    return float(np.linalg.norm(F.T @ J @ F - J, 2))


def is_symplectic(F: np.ndarray, tol: float = 1e-8) -> bool:
    return symplectic_residual(F) <= tol
