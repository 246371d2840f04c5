# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Named reference systems.

Ids are either a bare name (``translation``) or a name with arguments (``quadratic(1,0,...)``). Arguments are
separated by commas; nested ids inside ``realized(...)`` are split with parenthesis depth taken into account.
"""

from logging import getLogger
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import expm

from ..util import as_phase, parse_floats
from .symplectic import J
from .system import CoreError, HamiltonianSystem

if TYPE_CHECKING:
    from typing import Dict, List, Tuple

__all__ = ['CatalogError', 'affine_quadratic', 'get_system', 'list_systems', 'parse_system_id']

logger = getLogger(__name__)


class CatalogError(CoreError):
    """The system id is unknown or its arguments are invalid."""


def affine_quadratic(name: str, c: np.ndarray, S: np.ndarray) -> HamiltonianSystem:
    """
    ``H(y) = <c, y> + 1/2 y^T S y`` with its exact flow.

    The flow of an affine field ``J c + J S y`` is read off the exponential of the augmented 5x5 generator.
    """
    c = np.array(c, dtype=np.float64)
    S = np.array(S, dtype=np.float64)
    gen = np.zeros((5, 5))
    gen[:4, :4] = J @ S
    gen[:4, 4] = J @ c

    def H(y):
        return c @ y + 0.5 * (y @ S @ y)

    def grad(y):
        return c + S @ y

    def hess(_y):
        return S

    def exact_flow(y, t):
        e = expm(t * gen)
        F = e[:4, :4]
        return F @ y + e[:4, 4], F

    return HamiltonianSystem(name, H, grad, hess, exact_flow=exact_flow)


def _translation(args: 'List[str]') -> HamiltonianSystem:
    _no_args('translation', args)
    return affine_quadratic('translation', np.eye(4)[2], np.zeros((4, 4)))


def _hyperbolic_drift(args: 'List[str]') -> HamiltonianSystem:
    _no_args('hyperbolic-drift', args)
    return affine_quadratic('hyperbolic-drift', np.eye(4)[2], np.diag([0., 1., 0., -1.]))


def _elliptic_drift(args: 'List[str]') -> HamiltonianSystem:
    _no_args('elliptic-drift', args)
    return affine_quadratic('elliptic-drift', np.eye(4)[2], np.diag([0., 1., 0., 1.]))


def _quadratic(args: 'List[str]') -> HamiltonianSystem:
    values = _floats('quadratic', args)
    if len(values) != 16:
        raise CatalogError(f'quadratic needs 16 matrix entries, got {len(values)}')
    S = np.array(values).reshape(4, 4)
    if not np.allclose(S, S.T, rtol=0, atol=1e-12):
        raise CatalogError('quadratic matrix must be symmetric')
    return affine_quadratic(f'quadratic({",".join(args)})', np.zeros(4), S)


def _bump_rotation(args: 'List[str]') -> HamiltonianSystem:
    from ..perturb import build_bumps, build_perturbed_hamiltonian

    values = _floats('bump-rotation', args)
    if not values:
        values = (0.01, 0.1, 0.5)
    if len(values) != 3:
        raise CatalogError(f'bump-rotation takes (alpha, r, nu), got {len(values)} values')
    alpha, r, nu = values
    return build_perturbed_hamiltonian(build_bumps(r, nu, alpha=alpha))


def _realized(args: 'List[str]') -> HamiltonianSystem:
    from ..flowbox import realized_system

    if len(args) != 4:
        raise CatalogError(f'realized takes (base, x1:x2:x3:x4, alpha, r), got {len(args)} arguments')
    base = get_system(args[0])
    try:
        x = as_phase(parse_floats(args[1], ':'))
        alpha, r = float(args[2]), float(args[3])
    except ValueError as e:
        raise CatalogError(f'invalid realized arguments: {e}') from e
    return realized_system(base, x, alpha, r)


_systems = {
    'translation': (_translation, 'H = y3'),
    'hyperbolic-drift': (_hyperbolic_drift, 'H = y3 + (y2^2 - y4^2)/2'),
    'elliptic-drift': (_elliptic_drift, 'H = y3 + (y2^2 + y4^2)/2'),
    'quadratic': (_quadratic, 'H = y^T S y / 2, S given as 16 row-major entries'),
    'bump-rotation': (_bump_rotation, 'H = y3 - alpha*l(y1)*lt(y3)*phi(rho), arguments (alpha, r, nu)'),
    'realized': (_realized, 'rotation bump transported to a regular point, arguments (base, x, alpha, r)'),
}


def _no_args(name: str, args: 'List[str]'):
    if args:
        raise CatalogError(f'{name} takes no arguments')


def _floats(name: str, args: 'List[str]') -> 'Tuple[float, ...]':
    try:
        return tuple(float(a) for a in args)
    except ValueError as e:
        raise CatalogError(f'invalid {name} argument: {e}') from e


def parse_system_id(text: str) -> 'Tuple[str, List[str]]':
    """Split ``name(arg, arg, ...)`` into the name and top-level arguments."""
    text = text.strip()
    if '(' not in text:
        return text, []
    if not text.endswith(')'):
        raise CatalogError(f'unbalanced parentheses in system id {text!r}')
    name, _, inner = text.partition('(')
    inner = inner[:-1]

    args = []
    depth = 0
    current = []
    for ch in inner:
        if ch == ',' and depth == 0:
            args.append(''.join(current).strip())
            current = []
            continue
        if ch == '(':
            depth += 1
        elif ch == ')':
            depth -= 1
            if depth < 0:
                raise CatalogError(f'unbalanced parentheses in system id {text!r}')
        current.append(ch)
    if depth != 0:
        raise CatalogError(f'unbalanced parentheses in system id {text!r}')
    tail = ''.join(current).strip()
    if tail or args:
        args.append(tail)
    return name.strip(), args


def get_system(system_id: str) -> HamiltonianSystem:
    """
    Build a catalog system from its id.

    :raises CatalogError: Unknown name or invalid arguments.
    """
    name, args = parse_system_id(system_id)
    try:
        factory = _systems[name][0]
    except KeyError:
        raise CatalogError(f'unknown system {name!r} (known: {", ".join(_systems)})')
    logger.debug('building system %s with %d arguments', name, len(args))
    return factory(args)


def list_systems() -> 'Dict[str, str]':
    """Names of the catalog entries with a one-line description."""
    return {k: v[1] for k, v in _systems.items()}
