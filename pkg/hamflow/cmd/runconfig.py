# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""
Run configuration shared by every subcommand.

Values come from the defaults below, then ``HAMFLOW_SEED``, then a ``--config`` file of key=value lines, then
command-line flags.
"""

from argparse import ArgumentTypeError
from logging import DEBUG, INFO, WARNING, basicConfig, getLogger
from math import pi
from os import environ
import sys
from typing import TYPE_CHECKING, NamedTuple

from ..common import HamflowError, opened_file
from ..core.system import Box
from ..fileio import FORMATS, write_table
from ..flow import METHODS, IntegratorConfig
from ..util import dump_kv, load_record, parse_floats

if TYPE_CHECKING:
    from argparse import ArgumentParser, Namespace
    from typing import Iterable, Optional, Sequence, Tuple, Union

__all__ = ['EXIT_OK', 'EXIT_FAILURE', 'EXIT_USAGE', 'SEED_VARIABLE', 'ConfigError', 'RunConfig', 'add_run_arguments',
           'run_config', 'setup_logging', 'emit_table', 'emit_text']

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SEED_VARIABLE = 'HAMFLOW_SEED'


class ConfigError(HamflowError):
    """The run configuration is invalid."""


class RunConfig(NamedTuple):
    system: str = 'hyperbolic-drift'
    y0: 'Tuple[float, ...]' = (0.0, 0.0, 0.0, 0.0)
    T: float = 10.0
    dt: float = 1e-3
    method: str = 'implicit-midpoint'
    m: int = 1
    m_max: int = 5
    n: int = 100
    seed: int = 0
    energy: float = 0.0
    width: float = 0.0
    patch: float = 0.0
    alpha: float = 0.01
    r: float = 0.1
    nu: float = 0.5
    epsilon: float = 1.0
    grid: int = 10_000
    delta: float = 0.2
    alpha0: float = pi / 2
    gamma: float = 1e-2
    kappa: float = 0.1
    tol: float = 1e-6
    output: str = ''
    output_fs: str = ''
    format: str = 'csv'
    timestamp: bool = True
    jobs: int = 1

    def validate(self) -> 'RunConfig':
        """:raises ConfigError: A value is out of range."""
        if len(self.y0) != 4:
            raise ConfigError(f'y0 needs 4 coordinates, got {len(self.y0)}')
        if self.format not in FORMATS:
            raise ConfigError(f'unknown format {self.format!r} (expected one of {", ".join(FORMATS)})')
        if self.method not in METHODS:
            raise ConfigError(f'unknown method {self.method!r} (expected one of {", ".join(METHODS)})')
        if not self.dt > 0:
            raise ConfigError(f'dt must be positive, got {self.dt!r}')
        if self.patch < 0:
            raise ConfigError(f'patch must be non-negative, got {self.patch!r}')
        for name in ('m', 'm_max', 'n', 'jobs', 'grid'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be at least 1, got {getattr(self, name)!r}')
        return self

    @property
    def integrator(self) -> IntegratorConfig:
        # noinspection PyArgumentList
        return IntegratorConfig(dt=self.dt, method=self.method)

    @property
    def sampling_patch(self) -> 'Optional[Box]':
        return Box.cube(self.patch) if self.patch else None

    def to_text(self) -> str:
        return dump_kv(self._asdict())

    @classmethod
    def from_text(cls, text: 'Union[str, Iterable[str]]', base: 'RunConfig' = None) -> 'RunConfig':
        """
        Read key=value lines on top of ``base`` (the defaults when not given). Keys left out keep their value.

        :raises ConfigError: Unknown keys or malformed values.
        """
        lines = text.splitlines() if isinstance(text, str) else text
        try:
            values = load_record(cls, lines, partial=True)
        except ValueError as e:
            raise ConfigError(f'invalid config: {e}') from None
        if 'y0' in values:
            values['y0'] = tuple(values['y0'])
        return (base or cls())._replace(**values)


def _floats_arg(text: str) -> 'Tuple[float, ...]':
    try:
        return parse_floats(text)
    except ValueError:
        raise ArgumentTypeError(f'expected comma separated reals, got {text!r}')


# dest: (flag, type, help)
_FLAGS = {
    'system': ('--system', str, 'catalog system id, e.g. hyperbolic-drift or quadratic(...)'),
    'y0': ('--y0', _floats_arg, 'start point x1,x2,x3,x4'),
    'T': ('--T', float, 'orbit length'),
    'dt': ('--dt', float, 'integrator step'),
    'method': ('--method', str, f'integrator ({", ".join(METHODS)})'),
    'm': ('--m', int, 'domination window'),
    'm_max': ('--m-max', int, 'largest window tried'),
    'n': ('--n', int, 'number of sample points'),
    'seed': ('--seed', int, f'random seed (falls back to {SEED_VARIABLE})'),
    'energy': ('--energy', float, 'energy level'),
    'width': ('--width', float, 'energy band half-width (0 for a surface)'),
    'patch': ('--patch', float, 'sample inside a cube of this half-width around the origin (0 for the whole domain)'),
    'alpha': ('--alpha', float, 'rotation amplitude'),
    'r': ('--r', float, 'bump or flowbox radius'),
    'nu': ('--nu', float, 'flat core fraction of the bump'),
    'epsilon': ('--epsilon', float, 'C2 budget'),
    'grid': ('--grid', int, 'certification grid size'),
    'delta': ('--delta', float, 'target exponent of the decay demo'),
    'alpha0': ('--alpha0', float, 'largest rotation per step'),
    'gamma': ('--gamma', float, 'rotation error threshold'),
    'kappa': ('--kappa', float, 'largest accepted bad fraction of the disk'),
    'tol': ('--tol', float, 'acceptance tolerance'),
}


def add_run_arguments(parser: 'ArgumentParser', *names: str):
    """Add the given run settings as flags, plus the output, logging and config flags every command takes."""
    for name in names:
        flag, kind, help_text = _FLAGS[name]
        parser.add_argument(flag, dest=name, type=kind, default=None, help=help_text)
    parser.add_argument('--config', help='key=value file with run settings')
    parser.add_argument('--output', '-o', dest='output', default=None, help='output file')
    parser.add_argument('--output-fs', dest='output_fs', default=None, help='FS URL to write the output into')
    parser.add_argument('--format', dest='format', default=None, choices=FORMATS, help='table format')
    parser.add_argument('--no-timestamp', dest='timestamp', action='store_false', default=None,
                        help='leave out the generated-at comment line')
    parser.add_argument('--jobs', dest='jobs', type=int, default=None, help='worker threads for scans')
    parser.add_argument('--verbose', '-v', action='count', default=0, help='log progress (-vv for details)')


def run_config(args: 'Namespace') -> RunConfig:
    """
    Build the run configuration for parsed arguments.

    :raises ConfigError: Bad seed variable, unreadable or invalid config file, or invalid values.
    """
    config = RunConfig()
    seed = environ.get(SEED_VARIABLE)
    if seed:
        try:
            config = config._replace(seed=int(seed))
        except ValueError:
            raise ConfigError(f'{SEED_VARIABLE} must be an integer, got {seed!r}')

    path = getattr(args, 'config', None)
    if path:
        try:
            with opened_file(path, mode='r') as f:
                config = RunConfig.from_text(f.read(), config)
        except OSError as e:
            raise ConfigError(f'cannot read config {path!r}: {e}')

    overrides = {k: v for k, v in vars(args).items() if k in RunConfig._fields and v is not None}
    if 'y0' in overrides:
        overrides['y0'] = tuple(overrides['y0'])
    config = config._replace(**overrides).validate()
    logger.debug('run config: %s', config)
    return config


def setup_logging(verbosity: int):
    level = WARNING if not verbosity else INFO if verbosity == 1 else DEBUG
    basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')


def emit_table(config: RunConfig, columns: 'Sequence[str]', rows: 'Iterable[Sequence]') -> int:
    """Write rows to the configured output, if there is one. Returns the number of rows."""
    rows = list(rows)
    if config.output:
        write_table(config.output, columns, rows, fs=config.output_fs or None, fmt=config.format,
                    timestamp=config.timestamp)
        logger.info('wrote %d rows to %s', len(rows), config.output)
    return len(rows)


def emit_text(config: RunConfig, text: str):
    """Write key=value text to the configured output, or print it."""
    if config.output:
        with opened_file(config.output, config.output_fs or None, mode='w') as f:
            f.write(text)
    else:
        print(text, end='')
