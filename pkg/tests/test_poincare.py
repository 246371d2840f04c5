# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import cosh, sinh

import numpy as np
import pytest

from hamflow import poincare
from hamflow.core.catalog import get_system
from hamflow.flow import IntegratorConfig

EXACT = IntegratorConfig(dt=1.0, method='exact')
DRIFT_BLOCK = np.array([[cosh(1), -sinh(1)], [-sinh(1), cosh(1)]])


def test_drift_block_at_origin():
    c = poincare.transversal_cocycle(get_system('hyperbolic-drift'), np.zeros(4), 1.0, EXACT)
    assert np.allclose(c.Phi, DRIFT_BLOCK)
    assert c.det_residual < 1e-12
    assert np.allclose(c.dst.base, [1., 0., 0., 0.])


def test_blocks_compose_to_the_full_cocycle():
    sys = get_system('hyperbolic-drift')
    y0 = np.array([0., 0.1, 0., -0.05])
    blocks = poincare.cocycle_blocks(sys, y0, 3.0, EXACT)
    assert len(blocks) == 3
    total = blocks[0]
    for b in blocks[1:]:
        total = poincare.compose(total, b)
    full = poincare.transversal_cocycle(sys, y0, 3.0, EXACT)
    assert np.allclose(total.Phi, full.Phi)
    assert total.t == pytest.approx(3.0)


def test_compose_frame_mismatch():
    sys = get_system('hyperbolic-drift')
    c1 = poincare.transversal_cocycle(sys, np.zeros(4), 1.0, EXACT)
    c2 = poincare.transversal_cocycle(sys, np.array([5., 0., 0., 0.]), 1.0, EXACT)
    with pytest.raises(poincare.FrameMismatchError) as excinfo:
        poincare.compose(c1, c2)
    assert 'cannot compose' in str(excinfo.value)


def test_identity_cocycle():
    sys = get_system('elliptic-drift')
    c = poincare.identity_cocycle(sys, np.zeros(4))
    assert np.array_equal(c.Phi, np.eye(2))
    assert c.t == 0.0
    assert np.array_equal(poincare.transversal_cocycle(sys, np.zeros(4), 0.0, EXACT).Phi, np.eye(2))


@pytest.mark.parametrize('name', ('hyperbolic-drift', 'elliptic-drift'))
def test_cocycle_preserves_area(name):
    sys = get_system(name)
    y0 = np.array([0.2, -0.1, 0.3, 0.15])
    c = poincare.transversal_cocycle(sys, y0, 2.0, EXACT)
    assert c.det_residual < 1e-10


def test_normal_cocycle_is_block_triangular():
    sys = get_system('hyperbolic-drift')
    y0 = np.array([0.2, -0.1, 0.3, 0.15])
    n = poincare.normal_cocycle(sys, y0, 1.5, EXACT)
    assert n.block_residual < 1e-10
    t = poincare.transversal_cocycle(sys, y0, 1.5, EXACT)
    assert np.allclose(n.P[:2, :2], t.Phi)


def test_section_map_differential():
    sys = get_system('hyperbolic-drift')
    y0 = np.array([0., 0.1, 0., 0.2])
    section = poincare.poincare_section_map(sys, y0, 1.0, EXACT)
    assert np.allclose(section(np.zeros(2)), 0.0, atol=1e-12)
    h = 1e-6
    cols = [(section(e) - section(-e)) / (2 * h) for e in np.eye(3) * h]
    P = poincare.normal_cocycle(sys, y0, 1.0, EXACT).P
    assert np.allclose(np.column_stack(cols), P, atol=1e-6)


def test_measure_ratio():
    sys = get_system('hyperbolic-drift')
    ratio = poincare.transversal_measure_ratio(sys, np.array([0., 0.1, 0., 0.2]), 1.0, EXACT)
    assert ratio.alpha != pytest.approx(1.0)
    assert ratio.residual < 1e-5


def test_cocycle_table():
    blocks = poincare.cocycle_blocks(get_system('translation'), np.zeros(4), 2.0, EXACT)
    rows = poincare.cocycle_table(blocks)
    assert [r[0] for r in rows] == [1.0, 2.0]
    assert all(len(r) == len(poincare.COCYCLE_COLUMNS) for r in rows)
    assert rows[1][1:5] == [1.0, 0.0, 0.0, 0.0]
