# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import atan2, cos, log, sin
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from typing import Dict, Iterable, Mapping, Sequence, Tuple

__all__ = ['as_phase', 'unit', 'perp', 'canonical_sign', 'rotation', 'sin_angle', 'line_angle', 'ScaledProduct',
           'format_value', 'dump_kv', 'load_kv', 'load_record', 'parse_floats']


def as_phase(y: 'Sequence[float]') -> np.ndarray:
    """Convert anything array-like to a float64 4-vector."""
    arr = np.array(y, dtype=np.float64).reshape(-1)
    if arr.shape != (4,):
        raise ValueError(f'expected 4 coordinates, got {arr.shape[0]}')
    return arr


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a vector. Zero vectors are returned unchanged."""
    n = np.linalg.norm(v)
    if n == 0:
        return v
    return v / n


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate a 2-vector by a quarter turn counterclockwise."""
    return np.array([-v[1], v[0]])


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip a direction so that its first clearly nonzero component is positive."""
    for c in v:
        if abs(c) > 1e-14:
            return v if c > 0 else -v
    return v


def rotation(alpha: float) -> np.ndarray:
    """Counterclockwise rotation of the plane by ``alpha``."""
    c, s = cos(alpha), sin(alpha)
    return np.array([[c, -s], [s, c]])


def sin_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Sine of the angle between two lines in the plane."""
    return abs(a[0] * b[1] - a[1] * b[0]) / (np.linalg.norm(a) * np.linalg.norm(b))


def line_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in [0, pi/2] between the lines spanned by two 2-vectors."""
    return atan2(abs(a[0] * b[1] - a[1] * b[0]), abs(a[0] * b[0] + a[1] * b[1]))


class ScaledProduct:
    """
    Running product of square matrices kept as ``exp(log_scale) * matrix``.

    Products of cocycle blocks overflow quickly; the matrix is rescaled by its largest entry after every
    multiplication and the scale is accumulated in log form.
    """

    __slots__ = ('matrix', 'log_scale', 'count')

    def __init__(self, dim: int = 2):
        self.matrix = np.eye(dim)
        self.log_scale = 0.0
        self.count = 0

    def __repr__(self):
        return f'<{type(self).__name__} log_scale={self.log_scale!r} count={self.count}>'

    def push(self, block: np.ndarray):
        """Left-multiply by ``block``."""
        m = block @ self.matrix
        c = np.max(np.abs(m))
        if c > 0:
            m = m / c
            self.log_scale += log(c)
        self.matrix = m
        self.count += 1

    def log_norm(self) -> float:
        """Logarithm of the spectral norm of the full product."""
        return self.log_scale + log(np.linalg.norm(self.matrix, 2))


def format_value(value) -> str:
    """Format a value for key=value text so that it reads back identically."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return ','.join(format_value(v) for v in value)
    if value is None:
        return ''
    return str(value)


def dump_kv(items: 'Mapping[str, object]') -> str:
    """Serialize a mapping into flat key=value lines."""
    return ''.join(f'{k}={format_value(v)}\n' for k, v in items.items())


def load_kv(lines: 'Iterable[str]') -> 'Dict[str, str]':
    """
    Parse flat key=value lines. Blank lines and lines starting with ``#`` are skipped.

    :raises ValueError: A line has no ``=`` or a key is repeated.
    """
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise ValueError(f'line {lineno}: expected key=value, got {line!r}')
        key = key.strip()
        if key in out:
            raise ValueError(f'line {lineno}: duplicate key {key!r}')
        out[key] = value.strip()
    return out


def parse_floats(text: str, sep: str = ',') -> 'Tuple[float, ...]':
    """Parse a separated list of reals."""
    text = text.strip()
    if not text:
        return ()
    return tuple(float(p) for p in text.split(sep))


def load_record(cls, lines: 'Iterable[str]', *, partial: bool = False) -> dict:
    """
    Parse key=value lines into keyword arguments for the NamedTuple ``cls``, typed from its annotations.
    With ``partial``, keys may be left out and only the given ones are returned.

    Booleans are ``true``/``false``; tuples of reals are comma separated.

    :raises ValueError: A key is missing, unknown or has a malformed value.
    """
    raw = load_kv(lines)
    unknown = set(raw) - set(cls._fields)
    if unknown:
        raise ValueError(f'unknown keys: {", ".join(sorted(unknown))}')
    missing = [f for f in cls._fields if f not in raw]
    if missing and not partial:
        raise ValueError(f'missing keys: {", ".join(missing)}')
    out = {}
    for name in cls._fields:
        if name not in raw:
            continue
        kind = cls.__annotations__[name]
        value = raw[name]
        try:
            if kind is bool:
                if value not in ('true', 'false'):
                    raise ValueError(f'expected true or false, got {value!r}')
                out[name] = value == 'true'
            elif kind in (int, float, str):
                out[name] = kind(value)
            else:
                out[name] = parse_floats(value)
        except ValueError as e:
            raise ValueError(f'{name}: {e}') from None
    return out
