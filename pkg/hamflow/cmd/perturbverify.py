# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..perturb import build_bumps, certify, grid_report
from .runconfig import EXIT_OK, emit_text, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    profile = build_bumps(config.r, config.nu, alpha=config.alpha)
    if args.grid_output:
        rows = grid_report(profile, args.grid_output, config.grid, fs=config.output_fs or None, fmt=config.format,
                           timestamp=config.timestamp)
        print(f'wrote {rows} grid points to {args.grid_output}')
    cert = certify(profile, config.epsilon, config.grid, gamma=config.gamma, seed=config.seed)
    emit_text(config, cert.to_text())
    print(f'certified alpha={cert.alpha!r} r={cert.r!r}: C2 distance {cert.c2_bound!r} <= epsilon '
          f'{cert.epsilon!r}, rotation error {cert.rotation_error!r}')
    return EXIT_OK
