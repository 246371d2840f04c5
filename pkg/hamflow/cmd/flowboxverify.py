# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..flowbox import build_chart
from ..perturb import CertificateError
from .runconfig import EXIT_OK, emit_text, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    chart = build_chart(sys, config.y0, config.r, n=config.n, seed=config.seed, jobs=config.jobs)
    cert = chart.residuals
    emit_text(config, cert.to_text())
    print(f'chart at radius {chart.radius!r}: worst residual {cert.worst:.3e} over {cert.n_samples} samples')
    if cert.worst > config.tol:
        raise CertificateError('chart residual', cert.worst, config.tol)
    return EXIT_OK
