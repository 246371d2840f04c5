# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from typing import TYPE_CHECKING

from ..core.catalog import list_systems
from .runconfig import EXIT_OK

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace


def main(parser: 'ArgumentParser', args: 'Namespace') -> int:
    systems = list_systems()
    width = max(len(k) for k in systems)
    for name, description in systems.items():
        print(f'{name:<{width}}  {description}')
    return EXIT_OK
