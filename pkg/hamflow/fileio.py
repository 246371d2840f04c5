# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

"""Writers and readers for tables (CSV and plot-data) and binary orbit checkpoints."""

import csv
from datetime import datetime, timezone
from logging import getLogger
from struct import Struct
from typing import TYPE_CHECKING

import numpy as np

from . import __version__
from .common import HamflowError, opened_file
from .util import format_value

if TYPE_CHECKING:
    from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

    from fs.base import FS

    from .common import FilePathOrObject

__all__ = ['FORMATS', 'CHECKPOINT_MAGIC', 'CheckpointError', 'timestamp_line', 'write_table', 'read_table',
           'write_checkpoint', 'read_checkpoint']

logger = getLogger(__name__)

FORMATS = ('csv', 'plot-data')
CHECKPOINT_MAGIC = b'HFLX1'
_checkpoint_header = Struct('<5sII')


class CheckpointError(HamflowError):
    """The checkpoint file is malformed."""


def timestamp_line() -> str:
    return f'# generated {datetime.now(timezone.utc).isoformat(timespec="seconds")} by hamflow {__version__}'


def _write_rows(fh: 'IO', columns: 'Sequence[str]', rows: 'Iterable[Sequence]', fmt: str, timestamp: bool):
    if timestamp:
        fh.write(timestamp_line() + '\n')
    if fmt == 'csv':
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    else:
        # gnuplot reads '#' lines as comments and whitespace-separated columns
        fh.write('# ' + ' '.join(columns) + '\n')
        for row in rows:
            fh.write(' '.join(format_value(v) or 'nan' for v in row) + '\n')


def write_table(path: 'FilePathOrObject', columns: 'Sequence[str]', rows: 'Iterable[Sequence]', *,
                fs: 'Optional[Union[FS, str]]' = None, fmt: str = 'csv', timestamp: bool = True):
    """
    Write a table as CSV or as gnuplot-compatible plot data.

    :param path: Output path, or an open text file object.
    :param columns: Column names.
    :param rows: Row values. Floats are written with ``repr`` so they read back bit-exactly.
    :param fs: A filesystem or an FS URL to write into.
    :param fmt: ``csv`` or ``plot-data``.
    :param timestamp: Write the ``# generated ...`` comment line first.
    """
    if fmt not in FORMATS:
        raise HamflowError(f'unknown table format {fmt!r}')
    with opened_file(path, fs, mode='w') as fh:
        _write_rows(fh, columns, rows, fmt, timestamp)


def read_table(path: 'FilePathOrObject', *,
               fs: 'Optional[Union[FS, str]]' = None) -> 'Tuple[List[str], List[List[str]]]':
    """Read back a CSV table written by :func:`write_table`, skipping comment lines."""
    with opened_file(path, fs, mode='r') as fh:
        lines = [line for line in fh if not line.startswith('#')]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        return [], []
    return header, [row for row in reader]


def write_checkpoint(path: 'FilePathOrObject', table: 'Sequence[Sequence[float]]', *,
                     fs: 'Optional[Union[FS, str]]' = None):
    """
    Write a numeric table as a binary checkpoint: magic, row and column counts, then little-endian float64
    values in row-major order.
    """
    data = np.asarray(table, dtype='<f8')
    if data.ndim != 2:
        raise CheckpointError(f'checkpoint table must be 2-dimensional, got {data.ndim} dimensions')
    rows, cols = data.shape
    with opened_file(path, fs, mode='wb') as fh:
        fh.write(_checkpoint_header.pack(CHECKPOINT_MAGIC, rows, cols))
        fh.write(data.tobytes(order='C'))
    logger.debug('wrote checkpoint with %d rows and %d columns', rows, cols)


def read_checkpoint(path: 'FilePathOrObject', *, fs: 'Optional[Union[FS, str]]' = None) -> np.ndarray:
    """
    Read a checkpoint written by :func:`write_checkpoint`.

    :raises CheckpointError: Bad magic or truncated data.
    """
    with opened_file(path, fs, mode='rb') as fh:
        header = fh.read(_checkpoint_header.size)
        if len(header) != _checkpoint_header.size:
            raise CheckpointError('checkpoint header is truncated')
        magic, rows, cols = _checkpoint_header.unpack(header)
        if magic != CHECKPOINT_MAGIC:
            raise CheckpointError(f'bad checkpoint magic {magic!r}')
        raw = fh.read()
    expected = rows * cols * 8
    if len(raw) != expected:
        raise CheckpointError(f'checkpoint body is {len(raw)} bytes, expected {expected}')
    return np.frombuffer(raw, dtype='<f8').reshape(rows, cols).astype(np.float64)
