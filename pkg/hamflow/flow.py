# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Integration of the Hamiltonian flow together with its differential.

Every one-step map carries its exact Jacobian along, so the fundamental matrix ``F`` is the differential of the
discrete flow and stays symplectic up to the Newton tolerance. Backward time integrates the negated field.
"""

from logging import getLogger
from math import ceil, sqrt
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .common import HamflowError
from .core.catalog import get_system
from .core.symplectic import J, symplectic_residual
from .util import as_phase

if TYPE_CHECKING:
    from typing import Iterator, List, Tuple

    from .core.system import HamiltonianSystem

__all__ = ['METHODS', 'FlowError', 'StepError', 'EnergyDriftError', 'EscapeError', 'UnsupportedError',
           'TangentState', 'IntegratorConfig', 'OrbitSegment', 'integrate', 'integrate_tangent', 'flow_point',
           'tangent_blocks', 'reference_flow', 'orbit_table', 'ORBIT_COLUMNS']

logger = getLogger(__name__)

METHODS = ('implicit-midpoint', 'gauss2', 'exact')

ORBIT_COLUMNS = ('t', 'y1', 'y2', 'y3', 'y4', 'H', *(f'F{i}{j}' for i in range(1, 5) for j in range(1, 5)),
                 'sympl_residual')


class FlowError(HamflowError):
    """Generic exception for flow integration."""


class StepError(FlowError):
    """The implicit stage equations did not converge."""

    def __init__(self, time: float, iterations: int, residual: float):
        super().__init__(time, iterations, residual)

    def __str__(self):
        return f'Newton did not converge at t={self.args[0]!r} after {self.args[1]} iterations ' \
               f'(last correction {self.args[2]:.3e})'


class EnergyDriftError(FlowError):
    """Energy drifted further than the configured tolerance."""

    def __init__(self, drift: float, tol: float):
        super().__init__(drift, tol)

    @property
    def drift(self) -> float:
        return self.args[0]

    def __str__(self):
        return f'energy drift {self.args[0]:.3e} exceeds tolerance {self.args[1]:.3e}'


class EscapeError(FlowError):
    """The orbit left the working box of the system."""

    def __init__(self, time: float, point: np.ndarray):
        super().__init__(time, tuple(float(c) for c in point))

    @property
    def time(self) -> float:
        return self.args[0]

    @property
    def point(self) -> np.ndarray:
        return np.array(self.args[1])

    def __str__(self):
        return f'orbit left the domain at t={self.args[0]!r}, y={self.args[1]}'


class UnsupportedError(FlowError):
    """The system has no closed-form flow."""


class TangentState(NamedTuple):
    y: np.ndarray
    F: np.ndarray
    """Fundamental matrix D phi^t at the start point."""
    t: float

    @classmethod
    def initial(cls, y0: np.ndarray) -> 'TangentState':
        # noinspection PyArgumentList
        return cls(as_phase(y0), np.eye(4), 0.0)


class IntegratorConfig(NamedTuple):
    dt: float = 1e-3
    method: str = 'implicit-midpoint'
    newton_tol: float = 1e-12
    newton_max: int = 50
    energy_tol: float = 1e-6
    box_abort: bool = True

    def validate(self) -> 'IntegratorConfig':
        if not self.dt > 0:
            raise FlowError(f'dt must be positive, got {self.dt!r}')
        if not (self.newton_tol > 0 and self.energy_tol > 0):
            raise FlowError('tolerances must be positive')
        if self.newton_max < 1:
            raise FlowError(f'newton_max must be at least 1, got {self.newton_max!r}')
        if self.method not in METHODS:
            raise FlowError(f'unknown method {self.method!r} (expected one of {", ".join(METHODS)})')
        return self


class OrbitSegment(NamedTuple):
    times: np.ndarray
    """Signed elapsed times; increasing for forward runs and decreasing for backward runs."""
    states: 'List[TangentState]'

    @property
    def final(self) -> TangentState:
        return self.states[-1]

    @property
    def points(self) -> np.ndarray:
        return np.array([s.y for s in self.states])

    def __len__(self):
        return len(self.states)


def _step_count(T: float, dt: float) -> int:
    return max(1, ceil(abs(T) / dt - 1e-9))


class _Stepper:
    """One-step maps of the (possibly time-reversed) field with their Jacobians."""

    __slots__ = ('sys', 'sign', 'h', 'cfg')

    def __init__(self, sys: 'HamiltonianSystem', sign: float, h: float, cfg: IntegratorConfig):
        self.sys = sys
        self.sign = sign
        self.h = h
        self.cfg = cfg

    def field(self, y: np.ndarray) -> np.ndarray:
        return self.sign * (J @ self.sys.gradient(y))

    def jac(self, y: np.ndarray) -> np.ndarray:
        return self.sign * (J @ self.sys.hessian(y))

    def midpoint(self, y0: np.ndarray, t: float) -> 'Tuple[np.ndarray, np.ndarray]':
        h = self.h
        eye = np.eye(4)
        y1 = y0 + h * self.field(y0)
        delta = np.inf
        for it in range(1, self.cfg.newton_max + 1):
            m = (y0 + y1) / 2
            A = self.jac(m)
            res = y1 - y0 - h * self.field(m)
            d = np.linalg.solve(eye - h / 2 * A, res)
            y1 = y1 - d
            delta = float(np.linalg.norm(d))
            if delta <= self.cfg.newton_tol * (1 + np.linalg.norm(y1)):
                break
        else:
            raise StepError(t, self.cfg.newton_max, delta)
        A = self.jac((y0 + y1) / 2)
        step_jac = np.linalg.solve(eye - h / 2 * A, eye + h / 2 * A)
        return y1, step_jac

    # two-stage Gauss-Legendre collocation, order four
    _c = np.array([0.5 - sqrt(3) / 6, 0.5 + sqrt(3) / 6])
    _a = np.array([[0.25, 0.25 - sqrt(3) / 6], [0.25 + sqrt(3) / 6, 0.25]])
    _b = np.array([0.5, 0.5])

    def gauss2(self, y0: np.ndarray, t: float) -> 'Tuple[np.ndarray, np.ndarray]':
        h = self.h
        a = self._a
        f0 = self.field(y0)
        Z = np.array([self._c[0] * h * f0, self._c[1] * h * f0])
        eye8 = np.eye(8)
        delta = np.inf
        for it in range(1, self.cfg.newton_max + 1):
            Y = y0 + Z
            fields = [self.field(Y[0]), self.field(Y[1])]
            A = [self.jac(Y[0]), self.jac(Y[1])]
            res = np.concatenate([Z[i] - h * (a[i, 0] * fields[0] + a[i, 1] * fields[1]) for i in range(2)])
            jac = eye8 - h * np.block([[a[0, 0] * A[0], a[0, 1] * A[1]], [a[1, 0] * A[0], a[1, 1] * A[1]]])
            d = np.linalg.solve(jac, res).reshape(2, 4)
            Z = Z - d
            delta = float(np.linalg.norm(d))
            if delta <= self.cfg.newton_tol * (1 + np.linalg.norm(y0)):
                break
        else:
            raise StepError(t, self.cfg.newton_max, delta)

        Y = y0 + Z
        fields = [self.field(Y[0]), self.field(Y[1])]
        A = [self.jac(Y[0]), self.jac(Y[1])]
        jac = eye8 - h * np.block([[a[0, 0] * A[0], a[0, 1] * A[1]], [a[1, 0] * A[0], a[1, 1] * A[1]]])
        rhs = h * np.vstack([a[0, 0] * A[0] + a[0, 1] * A[1], a[1, 0] * A[0] + a[1, 1] * A[1]])
        dZ = np.linalg.solve(jac, rhs).reshape(2, 4, 4)
        y1 = y0 + h * (self._b[0] * fields[0] + self._b[1] * fields[1])
        step_jac = np.eye(4) + h * sum(self._b[i] * A[i] @ (np.eye(4) + dZ[i]) for i in range(2))
        return y1, step_jac


def _states(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
            cfg: IntegratorConfig) -> 'Iterator[TangentState]':
    y0 = as_phase(y0)
    cfg.validate()
    yield TangentState.initial(y0)
    if T == 0:
        return

    n = _step_count(T, cfg.dt)
    sign = 1.0 if T > 0 else -1.0
    h = abs(T) / n

    if cfg.method == 'exact':
        if sys.exact_flow is None:
            raise UnsupportedError(f'system {sys.name!r} has no closed-form flow')
        for k in range(1, n + 1):
            t = T if k == n else sign * k * h
            y, F = sys.exact_flow(y0, t)
            if cfg.box_abort and not sys.domain.contains(y):
                raise EscapeError(t, y)
            # noinspection PyArgumentList
            yield TangentState(np.asarray(y, dtype=np.float64), np.asarray(F, dtype=np.float64), t)
        return

    stepper = _Stepper(sys, sign, h, cfg)
    step = stepper.midpoint if cfg.method == 'implicit-midpoint' else stepper.gauss2
    y = y0
    F = np.eye(4)
    for k in range(1, n + 1):
        t = T if k == n else sign * k * h
        y, step_jac = step(y, t)
        F = step_jac @ F
        if cfg.box_abort and not sys.domain.contains(y):
            raise EscapeError(t, y)
        # noinspection PyArgumentList
        yield TangentState(y, F, t)


def _check_energy(sys: 'HamiltonianSystem', y0: np.ndarray, final: TangentState, cfg: IntegratorConfig):
    drift = abs(sys.energy(final.y) - sys.energy(y0))
    if drift > cfg.energy_tol:
        raise EnergyDriftError(drift, cfg.energy_tol)
    logger.debug('integrated %s to t=%r, energy drift %.3e', cfg.method, final.t, drift)


def integrate(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
              cfg: IntegratorConfig = IntegratorConfig()) -> OrbitSegment:
    """
    Integrate the orbit of ``y0`` for time ``T`` (either sign), keeping every step.

    :raises StepError: The implicit solver diverged.
    :raises EscapeError: The orbit left the domain and ``cfg.box_abort`` is set.
    :raises EnergyDriftError: The final energy error exceeds ``cfg.energy_tol``.
    """
    states = list(_states(sys, y0, T, cfg))
    _check_energy(sys, states[0].y, states[-1], cfg)
    # noinspection PyArgumentList
    return OrbitSegment(np.array([s.t for s in states]), states)


def integrate_tangent(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
                      cfg: IntegratorConfig = IntegratorConfig()) -> TangentState:
    """Integrate and return only the final state with its fundamental matrix."""
    start = None
    state = None
    for state in _states(sys, y0, T, cfg):
        if start is None:
            start = state.y
    _check_energy(sys, start, state, cfg)
    return state


def flow_point(sys: 'HamiltonianSystem', y0: np.ndarray, T: float,
               cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """End point of the orbit of ``y0`` after time ``T``."""
    return integrate_tangent(sys, y0, T, cfg).y


def tangent_blocks(sys: 'HamiltonianSystem', y0: np.ndarray, T: float, cfg: IntegratorConfig = IntegratorConfig(),
                   *, block: float = 1.0) -> 'List[Tuple[np.ndarray, TangentState]]':
    """
    Split ``[0, T]`` into pieces of length ``block`` (the last one may be shorter).

    :return: A list of ``(start_point, state)`` where ``state.F`` is the differential of that piece only and
        ``state.t`` is the signed time reached at the end of the piece.
    """
    out = []
    y = as_phase(y0)
    elapsed = 0.0
    sign = 1.0 if T >= 0 else -1.0
    remaining = abs(T)
    while remaining > 1e-12:
        length = min(block, remaining)
        state = integrate_tangent(sys, y, sign * length, cfg)
        elapsed += sign * length
        # noinspection PyArgumentList
        out.append((y, TangentState(state.y, state.F, elapsed)))
        y = state.y
        remaining -= length
    return out


def reference_flow(system_id: str, y0: np.ndarray, t: float) -> 'Tuple[np.ndarray, np.ndarray]':
    """
    Closed-form flow of a catalog system.

    :raises UnsupportedError: The system has no closed form.
    """
    sys = get_system(system_id)
    if sys.exact_flow is None:
        raise UnsupportedError(f'system {system_id!r} has no closed-form flow')
    y, F = sys.exact_flow(as_phase(y0), t)
    return np.asarray(y, dtype=np.float64), np.asarray(F, dtype=np.float64)


def orbit_table(sys: 'HamiltonianSystem', orbit: OrbitSegment) -> 'List[List[float]]':
    """Rows of the orbit dump: time, point, energy, the 16 entries of F and its symplectic residual."""
    rows = []
    for s in orbit.states:
        rows.append([s.t, *s.y, sys.energy(s.y), *s.F.reshape(-1), symplectic_residual(s.F)])
    return rows
