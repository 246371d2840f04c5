# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from ..common import HamflowError
from ..util import as_phase, parse_floats
from .symplectic import J

if TYPE_CHECKING:
    from typing import Callable, Optional, Tuple

    FlowMap = Callable[[np.ndarray, float], Tuple[np.ndarray, np.ndarray]]

__all__ = ['DEFAULT_CRIT_THRESHOLD', 'DEFAULT_DOMAIN', 'CoreError', 'EvaluationError', 'Box', 'HamiltonianSystem',
           'ham_vector_field', 'linearized_field', 'fd_gradient', 'fd_hessian', 'check_derivatives']

DEFAULT_CRIT_THRESHOLD = 1e-8


class CoreError(HamflowError):
    """Generic exception for core operations."""


class EvaluationError(CoreError):
    """H, its gradient or its Hessian returned a non-finite value."""

    def __init__(self, what: str, y: 'np.ndarray'):
        super().__init__(what, tuple(float(c) for c in y))

    def __str__(self):
        return f'non-finite {self.args[0]} at y={self.args[1]}'


class Box(NamedTuple):
    """Axis-aligned box in R^4."""

    lower: 'Tuple[float, float, float, float]'
    upper: 'Tuple[float, float, float, float]'

    def contains(self, y: np.ndarray) -> bool:
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def sample(self, rng: 'np.random.Generator') -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    @classmethod
    def cube(cls, half_width: float, center: 'Optional[np.ndarray]' = None) -> 'Box':
        c = np.zeros(4) if center is None else as_phase(center)
        # noinspection PyArgumentList
        return cls(tuple(c - half_width), tuple(c + half_width))

    @classmethod
    def from_bounds(cls, lower, upper) -> 'Box':
        lo, hi = as_phase(lower), as_phase(upper)
        if np.any(lo > hi):
            raise CoreError(f'box lower bound exceeds upper bound: {lo} > {hi}')
        # noinspection PyArgumentList
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))

    @classmethod
    def from_text(cls, text: str) -> 'Box':
        """Parse ``l1:u1,l2:u2,l3:u3,l4:u4``."""
        parts = text.split(',')
        if len(parts) != 4:
            raise CoreError(f'box needs 4 intervals, got {text!r}')
        lo, hi = zip(*(parse_floats(p, ':') for p in parts))
        return cls.from_bounds(lo, hi)

    def __str__(self):
        return ','.join(f'{lo!r}:{hi!r}' for lo, hi in zip(self.lower, self.upper))


DEFAULT_DOMAIN = Box.cube(1e3)


class HamiltonianSystem:
    """
    A Hamiltonian H on a box of R^4 together with its first and second derivatives.

    Missing derivatives are replaced with central finite differences (step 1e-5 * (1 + |y|)). Systems are
    immutable once built; transformations return new systems.

    :param name: Identifier, usually the catalog id.
    :param H: Energy function.
    :param grad: Gradient of H. Finite differences of H when None.
    :param hess: Hessian of H. Finite differences of the gradient when None.
    :param domain: Working box. Orbits leaving it are escapes.
    :param crit_threshold: Points with gradient norm below this are treated as critical.
    :param exact_flow: Optional closed-form flow map ``(y, t) -> (phi_t(y), D phi_t(y))``.
    """

    __slots__ = ('name', '_H', '_grad', '_hess', 'domain', 'crit_threshold', 'exact_flow')

    def __init__(self, name: str, H: 'Callable[[np.ndarray], float]',
                 grad: 'Optional[Callable[[np.ndarray], np.ndarray]]' = None,
                 hess: 'Optional[Callable[[np.ndarray], np.ndarray]]' = None, *,
                 domain: 'Box' = DEFAULT_DOMAIN, crit_threshold: float = DEFAULT_CRIT_THRESHOLD,
                 exact_flow: 'Optional[FlowMap]' = None):
        if crit_threshold <= 0:
            raise CoreError(f'crit_threshold must be positive, got {crit_threshold!r}')
        self.name = name
        self._H = H
        self._grad = grad
        self._hess = hess
        self.domain = domain
        self.crit_threshold = crit_threshold
        self.exact_flow = exact_flow

    def __repr__(self):
        return f'<{type(self).__name__} name={self.name!r} domain={self.domain} exact={self.exact_flow is not None}>'

    def energy(self, y: np.ndarray) -> float:
        value = float(self._H(y))
        if not np.isfinite(value):
            raise EvaluationError('energy', y)
        return value

    def gradient(self, y: np.ndarray) -> np.ndarray:
        if self._grad is None:
            g = fd_gradient(self._H, y)
        else:
            g = np.asarray(self._grad(y), dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise EvaluationError('gradient', y)
        return g

    def hessian(self, y: np.ndarray) -> np.ndarray:
        if self._hess is None:
            h = fd_hessian(self.gradient, y)
        else:
            h = np.asarray(self._hess(y), dtype=np.float64)
        if not np.all(np.isfinite(h)):
            raise EvaluationError('Hessian', y)
        return h

    def with_domain(self, domain: 'Box') -> 'HamiltonianSystem':
        return type(self)(self.name, self._H, self._grad, self._hess, domain=domain,
                          crit_threshold=self.crit_threshold, exact_flow=self.exact_flow)

    def is_regular(self, y: np.ndarray) -> bool:
        return np.linalg.norm(self.gradient(y)) >= self.crit_threshold


def _fd_step(y: np.ndarray) -> float:
    return 1e-5 * (1. + np.linalg.norm(y))


def fd_gradient(H: 'Callable[[np.ndarray], float]', y: np.ndarray) -> np.ndarray:
    """Central finite-difference gradient."""
    h = _fd_step(y)
    g = np.empty(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        g[i] = (H(y + e) - H(y - e)) / (2 * h)
    return g


def fd_hessian(grad: 'Callable[[np.ndarray], np.ndarray]', y: np.ndarray) -> np.ndarray:
    """Central finite-difference Jacobian of a gradient, symmetrized."""
    h = _fd_step(y)
    cols = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        cols.append((grad(y + e) - grad(y - e)) / (2 * h))
    m = np.column_stack(cols)
    return (m + m.T) / 2


def ham_vector_field(sys: 'HamiltonianSystem', y: np.ndarray) -> np.ndarray:
    """X_H(y) = J grad H(y)."""
    return J @ sys.gradient(y)


def linearized_field(sys: 'HamiltonianSystem', y: np.ndarray) -> np.ndarray:
    """DX_H(y) = J Hess H(y)."""
    return J @ sys.hessian(y)


def check_derivatives(sys: 'HamiltonianSystem', y: np.ndarray) -> 'Tuple[float, float]':
    """
    Compare the supplied derivatives against finite differences.

    :return: Relative mismatch of the gradient and of the Hessian.
    """
    g = sys.gradient(y)
    g_fd = fd_gradient(sys.energy, y)
    h = sys.hessian(y)
    h_fd = fd_hessian(sys.gradient, y)
    g_err = np.linalg.norm(g - g_fd) / max(1., np.linalg.norm(g))
    h_err = np.linalg.norm(h - h_fd) / max(1., np.linalg.norm(h))
    return float(g_err), float(h_err)
