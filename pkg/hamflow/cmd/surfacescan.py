# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from logging import getLogger
from typing import TYPE_CHECKING

from ..core.catalog import get_system
from ..core.surface import EmptyLevelSetError, sample_energy_surface
from ..domination import SCAN_COLUMNS, classify_point, scan_row
from .runconfig import EXIT_OK, emit_table, run_config

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace

logger = getLogger(__name__)


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    config = run_config(args)
    sys = get_system(config.system)
    try:
        points = sample_energy_surface(sys, config.energy, config.n, config.seed, patch=config.sampling_patch).points
    except EmptyLevelSetError as e:
        logger.warning('nothing to scan: %s', e)
        points = []

    def classify(y):
        return classify_point(sys, y, config.m_max, config.T, config.integrator)

    if config.jobs > 1 and points:
        with ThreadPoolExecutor(config.jobs) as pool:
            results = list(pool.map(classify, points))
    else:
        results = [classify(y) for y in points]

    emit_table(config, SCAN_COLUMNS, [scan_row(y, c) for y, c in zip(points, results)])
    counts = Counter(c.label for c in results)
    print(f'scanned {len(points)} points on H={config.energy!r}: '
          + (', '.join(f'{k} {v}' for k, v in sorted(counts.items())) or 'empty'))
    return EXIT_OK
