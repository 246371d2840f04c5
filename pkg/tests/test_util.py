# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import e, pi
from typing import NamedTuple, Tuple

import numpy as np
import pytest

from hamflow import util


class Record(NamedTuple):
    name: str
    count: int
    value: float
    flag: bool
    point: 'Tuple[float, ...]'


def test_as_phase():
    assert util.as_phase([1, 2, 3, 4]).dtype == np.float64
    with pytest.raises(ValueError) as excinfo:
        util.as_phase([1, 2, 3])
    assert 'expected 4 coordinates' in str(excinfo.value)


def test_unit_keeps_zero():
    assert np.array_equal(util.unit(np.zeros(2)), np.zeros(2))
    assert np.linalg.norm(util.unit(np.array([3.0, 4.0]))) == pytest.approx(1.0)


canonical_params = (
    ((1.0, -2.0), (1.0, -2.0)),
    ((-1.0, 2.0), (1.0, -2.0)),
    ((0.0, -3.0), (0.0, 3.0)),
    ((1e-15, -1.0), (-1e-15, 1.0)),
)


@pytest.mark.parametrize('vector,expected', canonical_params)
def test_canonical_sign(vector, expected):
    assert np.array_equal(util.canonical_sign(np.array(vector)), np.array(expected))


line_angle_params = (
    ((1.0, 0.0), (0.0, 1.0), pi / 2),
    ((1.0, 0.0), (-1.0, 0.0), 0.0),
    ((1.0, 1.0), (1.0, 0.0), pi / 4),
    ((1.0, 1.0), (-1.0, 0.0), pi / 4),
)


@pytest.mark.parametrize('a,b,angle', line_angle_params)
def test_line_angle(a, b, angle):
    assert util.line_angle(np.array(a), np.array(b)) == pytest.approx(angle, abs=1e-15)


def test_rotation_quarter_turn():
    assert np.allclose(util.rotation(pi / 2) @ np.array([1.0, 0.0]), [0.0, 1.0], atol=1e-15)
    assert np.allclose(util.perp(np.array([1.0, 0.0])), [0.0, 1.0])


def test_scaled_product_does_not_overflow():
    prod = util.ScaledProduct()
    block = np.diag([e, 1 / e])
    for _ in range(1000):
        prod.push(block)
    assert prod.count == 1000
    assert prod.log_norm() == pytest.approx(1000.0, rel=1e-12)
    assert np.all(np.isfinite(prod.matrix))


def test_format_value_round_trip():
    value = 0.1 + 0.2
    assert float(util.format_value(value)) == value
    assert util.format_value(True) == 'true'
    assert util.format_value((1.5, 2.0)) == '1.5,2.0'
    assert util.format_value(None) == ''


def test_load_kv():
    text = '# comment\n\na = 1\nb=x=y\n'
    assert util.load_kv(text.splitlines()) == {'a': '1', 'b': 'x=y'}


load_kv_error_params = (
    ('a=1\na=2', 'duplicate key'),
    ('a=1\nnothing here', 'expected key=value'),
)


@pytest.mark.parametrize('text,message', load_kv_error_params)
def test_load_kv_errors(text, message):
    with pytest.raises(ValueError) as excinfo:
        util.load_kv(text.splitlines())
    assert message in str(excinfo.value)


def test_load_record_types():
    record = Record('x', 3, 0.25, True, (1.0, 2.0))
    text = util.dump_kv(record._asdict())
    assert Record(**util.load_record(Record, text.splitlines())) == record


def test_load_record_partial():
    values = util.load_record(Record, ['count=7'], partial=True)
    assert values == {'count': 7}


load_record_error_params = (
    (['name=x'], 'missing keys'),
    (['name=x', 'other=1'], 'unknown keys'),
    (['name=x', 'count=1', 'value=1', 'flag=yes', 'point=1'], 'flag: expected true or false'),
    (['name=x', 'count=1.5', 'value=1', 'flag=true', 'point=1'], 'count:'),
)


@pytest.mark.parametrize('lines,message', load_record_error_params)
def test_load_record_errors(lines, message):
    with pytest.raises(ValueError) as excinfo:
        util.load_record(Record, lines)
    assert message in str(excinfo.value)
