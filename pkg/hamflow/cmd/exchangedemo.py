# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..flowbox import decay_demo
from ..lyapunov import oseledets_splitting
from ..poincare import cocycle_blocks
from ..util import ScaledProduct, rotation
from .runconfig import EXIT_FAILURE, EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    blocks = [b.Phi for b in cocycle_blocks(sys, config.y0, config.T, config.integrator)]
    split = oseledets_splitting(sys, config.y0, config.T, config.integrator)
    result = decay_demo(blocks, split, config.delta, config.alpha0)

    angles = [0.0] * len(blocks)
    for k, a in enumerate(result.angles):
        angles[result.window_start + k] = a
    raw = ScaledProduct()
    modified = ScaledProduct()
    rows = []
    for t, (b, a) in enumerate(zip(blocks, angles), 1):
        raw.push(b)
        modified.push(b @ rotation(a))
        rows.append((t, raw.log_norm(), modified.log_norm(), a))
    emit_table(config, ('t', 'log_norm', 'log_norm_exchanged', 'angle'), rows)

    print(f'exponent {result.raw_exponent!r} -> {result.value!r} with an exchange of length {result.m} at '
          f't={result.window_start}')
    if result.value >= config.delta:
        print(f'exponent stays above delta={config.delta!r}')
        return EXIT_FAILURE
    return EXIT_OK
