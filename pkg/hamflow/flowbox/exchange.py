# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Direction exchange on unit cocycle blocks, and the exponent decay it produces.

A rotation ``R_a`` with ``|a| <= alpha0`` is inserted before every block. Lines through the origin are tracked
by their angle modulo pi; an orientation-preserving block acts on them as an increasing circle map, so the set
of lines reachable from the unstable direction after every step is an arc and can be propagated exactly.
"""

from logging import getLogger
from math import atan2, cos, pi, sin
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy.linalg import svd
from scipy.optimize import brentq

from ..lyapunov import product_exponent
from ..util import ScaledProduct, canonical_sign, line_angle, rotation, unit
from .common import FlowboxError, NoExchangeError

if TYPE_CHECKING:
    from typing import List, Optional, Sequence, Tuple

    from ..lyapunov import SplittingEstimate

__all__ = ['EXCHANGE_TOL', 'ExchangeSchedule', 'DecayResult', 'exchange_schedule', 'decay_demo']

logger = getLogger(__name__)

EXCHANGE_TOL = 1e-6


class ExchangeSchedule(NamedTuple):
    angles: 'Tuple[float, ...]'
    matrix: np.ndarray
    """``B_m R_{a_m} ... B_1 R_{a_1}``."""
    ratio: float
    """``|P n-| / |P n+|`` for the unrotated product ``P``; the exchange hypothesis asks for at least 1/2."""
    achieved: float
    """Angle between the image of the unstable line and the target line."""
    bound: float
    """Smallest rotation bound for which the exchange exists, up to root-finding tolerance."""


class DecayResult(NamedTuple):
    value: float
    """Exponent of the product with the exchange inserted."""
    raw_exponent: float
    angles: 'Tuple[float, ...]'
    window_start: int
    m: int


class _Arc(NamedTuple):
    lo: float
    width: float

    @property
    def full(self) -> bool:
        return self.width >= pi


def _angle(v: np.ndarray) -> float:
    return atan2(v[1], v[0]) % pi


def _direction(theta: float) -> np.ndarray:
    return np.array([cos(theta), sin(theta)])


def _push(block: np.ndarray, arc: _Arc, a: float) -> _Arc:
    lo = arc.lo - a
    width = arc.width + 2 * a
    if width >= pi:
        # noinspection PyArgumentList
        return _Arc(_angle(block @ _direction(lo)), pi)
    u = block @ _direction(lo)
    v = block @ _direction(lo + width)
    # cross(Bu, Bv) = det(B) sin(width), which keeps the sign exact for thin arcs
    image = atan2(np.linalg.det(block) * sin(width), float(u @ v))
    # noinspection PyArgumentList
    return _Arc(_angle(u), image)


def _arcs(blocks: 'Sequence[np.ndarray]', start: float, a: float) -> 'List[_Arc]':
    # noinspection PyArgumentList
    arcs = [_Arc(start, 0.0)]
    for b in blocks:
        arcs.append(_push(b, arcs[-1], a))
    return arcs


def _lift(theta: float, lo: float) -> float:
    """Representative of the line angle ``theta`` in ``[lo, lo + pi)``."""
    return lo + (theta - lo) % pi


def _margin(arc: _Arc, target: float) -> float:
    """Distance from the target to the arc edge; negative outside."""
    if arc.full:
        return pi
    t = _lift(target, arc.lo)
    hi = arc.lo + arc.width
    if t <= hi:
        return min(t - arc.lo, hi - t)
    return -min(t - hi, arc.lo + pi - t)


def _back_construct(blocks: 'Sequence[np.ndarray]', arcs: 'List[_Arc]', target: float,
                    a: float) -> 'List[float]':
    angles = []
    psi = _lift(target, arcs[-1].lo)
    for i in range(len(blocks), 0, -1):
        prev = arcs[i - 1]
        base = _lift(_angle(np.linalg.solve(blocks[i - 1], _direction(psi))), prev.lo)
        hi = prev.lo + prev.width
        # nearest representative of the preimage line to the arc
        phi = min((base - pi, base, base + pi), key=lambda p: max(prev.lo - p, p - hi, 0.0))
        theta = min(max(phi, prev.lo), hi)
        angles.append(float(np.clip(phi - theta, -a, a)))
        psi = theta
    return angles[::-1]


def _compose(blocks: 'Sequence[np.ndarray]', angles: 'Sequence[float]') -> np.ndarray:
    L = np.eye(2)
    for b, a in zip(blocks, angles):
        L = b @ rotation(a) @ L
    return L


def exchange_schedule(blocks: 'Sequence[np.ndarray]', alpha0: float, *, n_plus: 'Optional[np.ndarray]' = None,
                      n_minus: 'Optional[np.ndarray]' = None, tol: float = EXCHANGE_TOL) -> ExchangeSchedule:
    """
    Rotation angles ``|a_i| <= alpha0``, one per block, such that ``L = prod B_i R_{a_i}`` maps the unstable line
    at the start onto the stable line at the end.

    The smallest bound for which the exchange exists is found first, so the returned angles are as small as the
    blocks allow.

    :param blocks: Unit cocycle blocks in frame coordinates, first block first.
    :param n_plus: Unstable direction at the start. The most expanded direction of the product when not given.
    :param n_minus: Stable direction at the end. The image of the least expanded direction when not given.
    :raises NoExchangeError: No rotations within ``alpha0`` reach the target line.
    :raises FlowboxError: A block reverses orientation, or there are no blocks.
    """
    blocks = [np.asarray(b, dtype=np.float64) for b in blocks]
    if not blocks:
        raise FlowboxError('direction exchange needs at least one block')
    for i, b in enumerate(blocks):
        if np.linalg.det(b) <= 0:
            raise FlowboxError(f'block {i} does not preserve orientation')
    if alpha0 < 0:
        raise FlowboxError(f'alpha0 must be non-negative, got {alpha0!r}')

    P = _compose(blocks, [0.0] * len(blocks))
    _, _, Vh = np.linalg.svd(P)
    n_plus = canonical_sign(unit(Vh[0])) if n_plus is None else unit(np.asarray(n_plus, dtype=np.float64))
    if n_minus is None:
        n_minus = canonical_sign(unit(P @ Vh[1]))
    n_minus = unit(np.asarray(n_minus, dtype=np.float64))
    stable_start = unit(np.linalg.solve(P, n_minus))
    ratio = float(np.linalg.norm(P @ stable_start) / np.linalg.norm(P @ n_plus))
    # dominated blocks still get the search; only an unreachable target raises
    if ratio < 0.5:
        logger.warning('exchange hypothesis fails over %d blocks: norm ratio %.3e is below 1/2', len(blocks), ratio)

    start = _angle(n_plus)
    target = _angle(n_minus)

    def margin(a):
        return _margin(_arcs(blocks, start, a)[-1], target)

    if margin(0.0) >= 0:
        a = 0.0
    else:
        top = margin(alpha0)
        if top < 0:
            raise NoExchangeError(-top, alpha0)
        a = min(alpha0, brentq(margin, 0.0, alpha0, xtol=1e-14) + 1e-12)

    arcs = _arcs(blocks, start, a)
    angles = _back_construct(blocks, arcs, target, a)
    L = _compose(blocks, angles)
    achieved = line_angle(L @ n_plus, n_minus)
    logger.debug('exchange over %d blocks: bound %r, angles %s, achieved %.3e', len(blocks), a, angles, achieved)
    if achieved > tol:
        raise NoExchangeError(achieved, alpha0)
    # noinspection PyArgumentList
    return ExchangeSchedule(tuple(angles), L, ratio, achieved, a)


def decay_demo(blocks: 'Sequence[np.ndarray]', splitting: 'SplittingEstimate', delta: float, alpha0: float, *,
               m_max: 'Optional[int]' = None) -> DecayResult:
    """
    Bring the exponent of a block product below ``delta`` with one direction exchange in the middle.

    Growth along the unstable direction up to the middle of the window is handed over to the stable direction,
    which contracts it again over the second half. Exchange windows of length 1, 2, ... are tried until the
    modified exponent is below ``delta``; the best attempt is returned otherwise.

    :param splitting: Unstable and stable directions at the start of the blocks.
    :raises NoExchangeError: No window up to ``m_max`` allows an exchange.
    """
    blocks = [np.asarray(b, dtype=np.float64) for b in blocks]
    t = len(blocks)
    raw, _ = product_exponent(blocks, t)
    if raw < delta:
        # noinspection PyArgumentList
        return DecayResult(raw, raw, (), 0, 0)

    n_plus = unit(np.asarray(splitting.n_plus, dtype=np.float64))
    n_minus = unit(np.asarray(splitting.n_minus, dtype=np.float64))
    # unstable directions transported forward, renormalized every step
    plus = [n_plus]
    for b in blocks:
        plus.append(unit(b @ plus[-1]))

    def stable(k):
        # forward transport loses the stable direction; use the least expanded direction of what is left
        prod = ScaledProduct()
        for b in blocks[k:] if k < t else blocks:
            prod.push(b)
        if k == t:
            return unit(prod.matrix @ n_minus)
        _, _, vh = svd(prod.matrix)
        return vh[1]

    best = None
    error = None
    for m in range(1, (m_max or t) + 1):
        if m > t:
            break
        s = (t - m) // 2
        try:
            ex = exchange_schedule(blocks[s:s + m], alpha0, n_plus=plus[s], n_minus=stable(s + m))
        except NoExchangeError as e:
            error = e
            continue
        modified = blocks[:s] + [b @ rotation(a) for b, a in zip(blocks[s:s + m], ex.angles)] + blocks[s + m:]
        value, _ = product_exponent(modified, t)
        logger.debug('exchange window at %d of length %d: exponent %r', s, m, value)
        # noinspection PyArgumentList
        result = DecayResult(value, raw, ex.angles, s, m)
        if best is None or value < best.value:
            best = result
        if value < delta:
            break
    if best is None:
        raise error or FlowboxError(f'no exchange window up to m_max={m_max!r}')
    logger.info('exponent %r lowered to %r with an exchange of length %d at %d', raw, best.value, best.m,
                best.window_start)
    return best
