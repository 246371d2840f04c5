# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..flowbox import realize_rotation, schedule_from_certificate
from .runconfig import EXIT_OK, emit_text, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    realized, cert = realize_rotation(sys, config.y0, config.alpha, config.r, config.epsilon, nu=config.nu,
                                      gamma=config.gamma, kappa=config.kappa, grid=config.grid, seed=config.seed)
    schedule = schedule_from_certificate(sys, config.y0, cert)
    emit_text(config, cert.to_text() + schedule.to_text())
    print(f'{realized.name}: C2 distance {cert.c2_bound!r}, rotation error {cert.rotation_error!r}, '
          f'kappa fraction {cert.kappa_fraction!r}')
    return EXIT_OK
