# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..core.surface import Region
from ..lyapunov import EXPONENT_COLUMNS, exponent_row, integrated_le, upper_exponent
from .runconfig import EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    if args.integrated:
        # noinspection PyArgumentList
        region = Region(config.energy, config.width, config.sampling_patch)
        result = integrated_le(sys, region, config.T, config.n, config.seed, config.integrator, jobs=config.jobs)
        print(f'integrated exponent {result.value!r} +- {result.std_error!r} over {result.n_samples} samples '
              f'({result.escaped} dropped)')
        return EXIT_OK

    estimate = upper_exponent(sys, config.y0, config.T, config.integrator)
    emit_table(config, EXPONENT_COLUMNS, [exponent_row(config.seed, estimate, estimate.base, config.T)])
    print(f'lambda_plus={estimate.lambda_plus!r} over T={config.T!r} ({estimate.renorm_count} renormalizations)')
    return EXIT_OK
