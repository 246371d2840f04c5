# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from ..common import HamflowError

__all__ = ['PerturbationError', 'ParameterError', 'ValidityError', 'CertificateError']


class PerturbationError(HamflowError):
    """Generic error for bump perturbations."""


class ParameterError(PerturbationError):
    """The bump parameters are infeasible."""


class ValidityError(PerturbationError):
    """The start point leaves the region where the closed-form flow holds."""


class CertificateError(PerturbationError):
    """A certified bound does not hold."""

    def __init__(self, bound: str, value: float, limit: float):
        super().__init__(bound, value, limit)

    @property
    def bound(self) -> str:
        return self.args[0]

    def __str__(self):
        return f'{self.args[0]} violated: {self.args[1]!r} > {self.args[2]!r}'
