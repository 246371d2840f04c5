# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from argparse import ArgumentParser
import sys
from sys import argv, exit, version as pyver
from typing import TYPE_CHECKING

from .. import __version__
from ..common import HamflowError
from ..perturb import CertificateError
from .catalog import main as catalog_main
from .dominate import main as dominate_main
from .exchangedemo import main as exchangedemo_main
from .exponents import main as exponents_main
from .flowboxverify import main as flowboxverify_main
from .integrate import main as integrate_main
from .perturbverify import main as perturbverify_main
from .realize import main as realize_main
from .runconfig import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, ConfigError, add_run_arguments, setup_logging
from .splitting import main as splitting_main
from .surfacescan import main as surfacescan_main

if TYPE_CHECKING:
    from typing import List, Optional


def print_version(detail: int):
    if detail == 1:
        print('hamflow ' + __version__)
    elif detail >= 2:
        pyver_short = pyver.split()[0]
        print('hamflow ' + __version__ + ' running on Python ' + pyver_short)


def create_argparser(prog):
    p = ArgumentParser(prog=prog, description='Hamiltonian flows, Lyapunov exponents and local perturbations on R^4')

    p.add_argument('--version', '-V', action='count', help='Print version')

    subparsers = p.add_subparsers(metavar='command')

    def command(name, func, help_text, *settings):
        sp = subparsers.add_parser(name, help=help_text, description=help_text)
        add_run_arguments(sp, *settings)
        sp.set_defaults(func=func)
        return sp

    integrate_sp = command('integrate', integrate_main, 'integrate an orbit with its fundamental matrix',
                           'system', 'y0', 'T', 'dt', 'method')
    integrate_sp.add_argument('--checkpoint', help='also write the orbit table as a binary checkpoint')

    exponents_sp = command('exponents', exponents_main, 'finite-time upper Lyapunov exponent',
                           'system', 'y0', 'T', 'dt', 'method', 'n', 'seed', 'energy', 'width', 'patch')
    exponents_sp.add_argument('--integrated', action='store_true',
                              help='average over n samples of the energy surface or band instead')

    command('splitting', splitting_main, 'stable and unstable directions and their angle decay',
            'system', 'y0', 'T', 'dt', 'method')
    command('dominate', dominate_main, 'test m-domination along an orbit',
            'system', 'y0', 'T', 'dt', 'method', 'm')
    command('surface-scan', surfacescan_main, 'classify sampled points of an energy surface by domination',
            'system', 'T', 'dt', 'method', 'm_max', 'n', 'seed', 'energy', 'patch')

    perturb_sp = command('perturb-verify', perturbverify_main, 'certify the bump-rotation perturbation',
                         'alpha', 'r', 'nu', 'epsilon', 'grid', 'gamma', 'seed')
    perturb_sp.add_argument('--grid-output', help='write the per-point distances on the certification grid')

    command('flowbox-verify', flowboxverify_main, 'build and certify a flowbox chart',
            'system', 'y0', 'r', 'n', 'seed', 'tol')
    command('realize', realize_main, 'realize a rotation of the transversal cocycle at a regular point',
            'system', 'y0', 'alpha', 'r', 'nu', 'epsilon', 'grid', 'gamma', 'kappa', 'seed')
    command('exchange-demo', exchangedemo_main, 'lower the exponent of an orbit with one direction exchange',
            'system', 'y0', 'T', 'dt', 'method', 'delta', 'alpha0')

    catalog_sp = subparsers.add_parser('catalog', help='list the catalog systems',
                                       description='list the catalog systems')
    catalog_sp.set_defaults(func=catalog_main)

    return p


def main(args: 'Optional[List[str]]' = None) -> int:
    if args is None:
        args = argv[1:]

    p = create_argparser('hamflow')
    try:
        a = p.parse_args(args=args)
    except SystemExit as e:
        return e.code

    if a.version:
        print_version(a.version)
        return EXIT_OK

    if 'func' not in a:
        p.print_help()
        return EXIT_USAGE

    setup_logging(getattr(a, 'verbose', 0))
    try:
        return a.func(p, a)
    except ConfigError as e:
        print(f'hamflow: {e}', file=sys.stderr)
        return EXIT_USAGE
    except CertificateError as e:
        print(f'hamflow: certificate failed, {e}', file=sys.stderr)
        return EXIT_FAILURE
    except HamflowError as e:
        print(f'hamflow: {type(e).__name__}: {e}', file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    exit(main())
