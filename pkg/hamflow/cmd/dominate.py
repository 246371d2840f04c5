# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..domination import domination_scan
from .runconfig import EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    report = domination_scan(sys, config.y0, config.m, config.T, config.integrator)
    emit_table(config, ('t', 'ratio'), zip(report.times, report.ratios))
    if report.trivial:
        verdict = 'trivial splitting'
    else:
        verdict = 'dominated' if report.dominated else 'not dominated'
    print(f'm={report.m}: {verdict}, worst ratio {report.worst!r}, exponent {report.exponent!r}')
    return EXIT_OK
