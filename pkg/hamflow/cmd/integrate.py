# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..core.symplectic import symplectic_residual
from ..fileio import write_checkpoint
from ..flow import ORBIT_COLUMNS, integrate, orbit_table
from .runconfig import EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    orbit = integrate(sys, config.y0, config.T, config.integrator)
    rows = orbit_table(sys, orbit)
    emit_table(config, ORBIT_COLUMNS, rows)
    if args.checkpoint:
        write_checkpoint(args.checkpoint, rows, fs=config.output_fs or None)

    final = orbit.final
    drift = abs(sys.energy(final.y) - sys.energy(orbit.states[0].y))
    print(f'integrated {sys.name} to t={final.t!r} in {len(orbit) - 1} steps: energy drift {drift:.3e}, '
          f'symplectic residual {symplectic_residual(final.F):.3e}')
    return EXIT_OK
