# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..lyapunov import angle_decay, oseledets_splitting
from ..util import format_value
from .runconfig import EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    split = oseledets_splitting(sys, config.y0, config.T, config.integrator)
    emit_table(config, ('t', 'sin_angle'), angle_decay(sys, config.y0, config.T, config.integrator, splitting=split))
    print(f'n_plus={format_value(split.n_plus)} n_minus={format_value(split.n_minus)} angle={split.angle!r} '
          f'exponent={split.exponent!r}')
    return EXIT_OK
