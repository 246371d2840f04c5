# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Linear Poincaré flows as matrix cocycles between deterministic frames.

The transversal cocycle acts on the 2-dimensional fiber orthogonal to both the flow and the gradient, the normal
cocycle on the 3-dimensional fiber orthogonal to the flow. Both are expressed in the frames built by
:func:`hamflow.core.transversal_frame` at the two end points.
"""

from logging import getLogger
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .common import HamflowError
from .core.frame import transversal_frame
from .core.symplectic import J
from .flow import IntegratorConfig, flow_point, integrate_tangent, tangent_blocks
from .util import as_phase

if TYPE_CHECKING:
    from typing import Callable, List

    from .core.frame import TransversalFrame
    from .core.system import HamiltonianSystem

__all__ = ['PoincareError', 'FrameMismatchError', 'TransversalCocycle', 'NormalCocycle', 'MeasureRatio',
           'transversal_cocycle', 'normal_cocycle', 'cocycle_blocks', 'compose', 'identity_cocycle',
           'poincare_section_map', 'transversal_measure_ratio', 'cocycle_table', 'COCYCLE_COLUMNS']

logger = getLogger(__name__)

COCYCLE_COLUMNS = ('t', 'x1', 'x2', 'x3', 'x4', 'src_u1_1', 'src_u1_2', 'src_u1_3', 'src_u1_4',
                   'src_u2_1', 'src_u2_2', 'src_u2_3', 'src_u2_4', 'dst_u1_1', 'dst_u1_2', 'dst_u1_3', 'dst_u1_4',
                   'dst_u2_1', 'dst_u2_2', 'dst_u2_3', 'dst_u2_4', 'Phi11', 'Phi12', 'Phi21', 'Phi22', 'det_residual')


class PoincareError(HamflowError):
    """Generic exception for cocycle operations."""


class FrameMismatchError(PoincareError):
    """Two cocycles do not share the frame they are supposed to be glued along."""


class TransversalCocycle(NamedTuple):
    src: 'TransversalFrame'
    dst: 'TransversalFrame'
    Phi: np.ndarray
    t: float

    @property
    def det_residual(self) -> float:
        """Relative failure of det(Phi) * area(dst) = area(src)."""
        return abs(np.linalg.det(self.Phi) * self.dst.area / self.src.area - 1)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.Phi, 2))


class NormalCocycle(NamedTuple):
    src: 'TransversalFrame'
    dst: 'TransversalFrame'
    P: np.ndarray
    """3x3 matrix in the bases (u1, u2, gdir)."""
    t: float

    @property
    def block_residual(self) -> float:
        """Size of the gradient component picked up by the transversal block, relative to the matrix norm."""
        return float(np.linalg.norm(self.P[2, :2]) / max(1.0, np.linalg.norm(self.P, 2)))


class MeasureRatio(NamedTuple):
    measured: float
    """Volume of a small normal section divided by the volume of its image."""
    alpha: float
    """|X_H| at the end point over |X_H| at the start point."""

    @property
    def residual(self) -> float:
        return abs(self.measured - self.alpha) / self.alpha


def _project(src: 'TransversalFrame', dst: 'TransversalFrame', F: np.ndarray) -> np.ndarray:
    return dst.basis.T @ F @ src.basis


def transversal_cocycle(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                        cfg: IntegratorConfig = IntegratorConfig()) -> TransversalCocycle:
    """
    The transversal linear Poincaré map over time ``T``, assembled from unit-time blocks.

    :raises RegularityError: An end point is near-critical.
    """
    y0 = as_phase(y0)
    blocks = cocycle_blocks(sys, y0, T, cfg)
    if not blocks:
        return identity_cocycle(sys, y0)
    Phi = np.eye(2)
    for b in blocks:
        Phi = b.Phi @ Phi
    # noinspection PyArgumentList
    return TransversalCocycle(blocks[0].src, blocks[-1].dst, Phi, T)


def cocycle_blocks(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                   cfg: IntegratorConfig = IntegratorConfig()) -> 'List[TransversalCocycle]':
    """Unit-time transversal cocycles along the orbit of ``y0``; consecutive blocks share frames."""
    out = []
    src = transversal_frame(sys, as_phase(y0))
    prev_t = 0.0
    for _, state in tangent_blocks(sys, y0, T, cfg):
        dst = transversal_frame(sys, state.y)
        # noinspection PyArgumentList
        out.append(TransversalCocycle(src, dst, _project(src, dst, state.F), state.t - prev_t))
        src = dst
        prev_t = state.t
    return out


def normal_cocycle(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                   cfg: IntegratorConfig = IntegratorConfig()) -> NormalCocycle:
    """The linear Poincaré map on the fiber orthogonal to the flow, in the bases (u1, u2, gdir)."""
    y0 = as_phase(y0)
    state = integrate_tangent(sys, y0, T, cfg)
    src = transversal_frame(sys, y0)
    dst = transversal_frame(sys, state.y)
    P = dst.normal_basis.T @ state.F @ src.normal_basis
    # noinspection PyArgumentList
    return NormalCocycle(src, dst, P, T)


def identity_cocycle(sys: 'HamiltonianSystem', y: np.ndarray) -> TransversalCocycle:
    frame = transversal_frame(sys, as_phase(y))
    # noinspection PyArgumentList
    return TransversalCocycle(frame, frame, np.eye(2), 0.0)


def compose(c1: TransversalCocycle, c2: TransversalCocycle, *, tol: float = 1e-9) -> TransversalCocycle:
    """
    Glue ``c2`` after ``c1``.

    :raises FrameMismatchError: ``c1.dst`` and ``c2.src`` differ by more than ``tol``.
    """
    if not c1.dst.matches(c2.src, tol):
        raise FrameMismatchError(f'cannot compose: frame at {c1.dst.base} does not match frame at {c2.src.base}')
    # noinspection PyArgumentList
    return TransversalCocycle(c1.src, c2.dst, c2.Phi @ c1.Phi, c1.t + c2.t)


def _hit_time(sys: 'HamiltonianSystem', p: np.ndarray, target: np.ndarray, normal: np.ndarray, t0: float,
              cfg: IntegratorConfig) -> np.ndarray:
    s = t0
    q = flow_point(sys, p, s, cfg)
    for _ in range(20):
        f = (q - target) @ normal
        df = (J @ sys.gradient(q)) @ normal
        step = f / df
        s -= step
        q = flow_point(sys, p, s, cfg)
        if abs(step) <= 1e-13 * (1 + abs(s)):
            break
    return q


def poincare_section_map(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                         cfg: IntegratorConfig = IntegratorConfig()) -> 'Callable[[np.ndarray], np.ndarray]':
    """
    Nonlinear map between the normal hyperplanes at ``y0`` and at its time-``T`` image.

    The returned function takes coordinates along (u1, u2, gdir) at ``y0`` (a 2-vector is padded with zero) and
    returns the coordinates of the hit point along (u1, u2, gdir) at the end point. Its differential at the origin
    is the normal cocycle.
    """
    y0 = as_phase(y0)
    end = flow_point(sys, y0, T, cfg)
    src = transversal_frame(sys, y0)
    dst = transversal_frame(sys, end)

    def section(c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=np.float64)
        if c.shape == (2,):
            c = np.append(c, 0.0)
        p = y0 + src.normal_basis @ c
        q = _hit_time(sys, p, end, dst.xdir, T, cfg)
        return dst.normal_basis.T @ (q - end)

    return section


def transversal_measure_ratio(sys: 'HamiltonianSystem', y0: np.ndarray, t: float,
                              cfg: IntegratorConfig = IntegratorConfig(), *, radius: float = 1e-5) -> MeasureRatio:
    """
    Compare the volume change of a small normal section carried by the flow against |X_H(phi^t x)| / |X_H(x)|.

    The volume ratio is taken from a central-difference Jacobian of :func:`poincare_section_map` with step
    ``radius``.
    """
    y0 = as_phase(y0)
    section = poincare_section_map(sys, y0, t, cfg)
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = radius
        cols.append((section(e) - section(-e)) / (2 * radius))
    jac = np.column_stack(cols)
    measured = 1 / abs(np.linalg.det(jac))
    end = flow_point(sys, y0, t, cfg)
    alpha = float(np.linalg.norm(J @ sys.gradient(end)) / np.linalg.norm(J @ sys.gradient(y0)))
    logger.debug('transversal measure ratio at t=%r: measured %r, expected %r', t, measured, alpha)
    # noinspection PyArgumentList
    return MeasureRatio(measured, alpha)


def cocycle_table(blocks: 'List[TransversalCocycle]') -> 'List[List[float]]':
    """Rows of the cocycle dump, one per block, with the cumulative time in the first column."""
    rows = []
    elapsed = 0.0
    for c in blocks:
        elapsed += c.t
        rows.append([elapsed, *c.src.base, *c.src.u1, *c.src.u2, *c.dst.u1, *c.dst.u2, *c.Phi.reshape(-1),
                     c.det_residual])
    return rows
