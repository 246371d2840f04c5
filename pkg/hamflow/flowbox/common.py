# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from ..common import HamflowError

__all__ = ['FlowboxError', 'TransversalityError', 'ChartError', 'FlowboxOverlapError', 'ScheduleError',
           'NoExchangeError']


class FlowboxError(HamflowError):
    """Generic error for flowbox charts and realizations."""


class TransversalityError(FlowboxError):
    """The Hamiltonian field vanishes at the chart center, so no transversal section exists."""


class ChartError(FlowboxError):
    """The hitting time or the energy projection could not be solved."""


class FlowboxOverlapError(FlowboxError):
    """The orbit segment comes back too close to itself for a flowbox of the requested radius."""

    def __init__(self, distance: float, radius: float):
        super().__init__(distance, radius)

    @property
    def distance(self) -> float:
        return self.args[0]

    def __str__(self):
        return f'orbit returns within {self.args[0]:.3e} of itself, flowbox radius is {self.args[1]:.3e}'


class ScheduleError(FlowboxError):
    """Two realization schedules cannot be concatenated."""


class NoExchangeError(FlowboxError):
    """No rotation schedule within the angle bound maps the unstable direction onto the stable one."""

    def __init__(self, gap: float, bound: float):
        super().__init__(gap, bound)

    @property
    def gap(self) -> float:
        """Smallest angle between a reachable line and the target line."""
        return self.args[0]

    def __str__(self):
        return f'no exchange with rotations up to {self.args[1]!r}: target missed by {self.args[0]:.3e} rad'
