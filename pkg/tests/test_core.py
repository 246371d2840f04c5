# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import cosh, sinh

import numpy as np
import pytest
from scipy.linalg import expm

from hamflow.core import catalog, frame, surface, symplectic, system


def random_points(n, seed=1, scale=0.5):
    return np.random.default_rng(seed).uniform(-scale, scale, (n, 4))


def test_j_is_a_complex_structure():
    J = symplectic.J
    assert np.array_equal(J.T, -J)
    assert np.array_equal(J @ J, -np.eye(4))
    assert symplectic.omega0(np.eye(4)[0], np.eye(4)[2]) == 1.0
    assert symplectic.omega0(np.eye(4)[1], np.eye(4)[3]) == 1.0


def test_j_is_read_only():
    with pytest.raises(ValueError):
        symplectic.J[0, 0] = 1.0


def test_linear_hamiltonian_flow_is_symplectic():
    S = np.array([[2., 0.3, 0., 0.1], [0.3, 1., 0.2, 0.], [0., 0.2, 1.5, 0.], [0.1, 0., 0., 0.5]])
    F = expm(0.7 * symplectic.J @ S)
    assert symplectic.is_symplectic(F, 1e-12)
    assert not symplectic.is_symplectic(np.diag([2., 1., 1., 1.]))


box_params = (
    ('-1:1,-2:2,0:1,3:4', (-1., -2., 0., 3.), (1., 2., 1., 4.)),
    ('0:0,0:0,0:0,0:0', (0., 0., 0., 0.), (0., 0., 0., 0.)),
)


@pytest.mark.parametrize('text,lower,upper', box_params)
def test_box_from_text(text, lower, upper):
    box = system.Box.from_text(text)
    assert box.lower == lower
    assert box.upper == upper
    assert system.Box.from_text(str(box)) == box


box_error_params = (
    ('-1:1,-1:1,-1:1', 'box needs 4 intervals'),
    ('1:-1,-1:1,-1:1,-1:1', 'lower bound exceeds upper bound'),
)


@pytest.mark.parametrize('text,message', box_error_params)
def test_box_errors(text, message):
    with pytest.raises(system.CoreError) as excinfo:
        system.Box.from_text(text)
    assert message in str(excinfo.value)


def test_box_contains():
    box = system.Box.cube(1.0)
    assert box.contains(np.zeros(4))
    assert not box.contains(np.array([0., 0., 1.5, 0.]))
    assert box.volume == pytest.approx(16.0)


def test_crit_threshold_must_be_positive():
    with pytest.raises(system.CoreError) as excinfo:
        system.HamiltonianSystem('bad', lambda y: 0.0, crit_threshold=0.0)
    assert 'crit_threshold' in str(excinfo.value)


def test_non_finite_energy():
    sys = system.HamiltonianSystem('nan', lambda y: float('nan'))
    with pytest.raises(system.EvaluationError) as excinfo:
        sys.energy(np.zeros(4))
    assert 'non-finite energy' in str(excinfo.value)


def test_finite_difference_fallback():
    sys = system.HamiltonianSystem('quartic', lambda y: y[0] ** 4 / 4 + y[2] + y[1] * y[3])
    y = np.array([0.5, 0.2, -0.1, 0.3])
    assert np.allclose(sys.gradient(y), [0.125, 0.3, 1.0, 0.2], atol=1e-8)
    H = sys.hessian(y)
    assert H[0, 0] == pytest.approx(0.75, abs=1e-4)
    assert H[1, 3] == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize('name', ('translation', 'hyperbolic-drift', 'elliptic-drift', 'bump-rotation'))
def test_catalog_derivatives(name):
    sys = catalog.get_system(name)
    for y in random_points(5):
        g_err, h_err = system.check_derivatives(sys, y * 0.1)
        assert g_err < 1e-6
        assert h_err < 1e-4


def test_frame_is_orthonormal_and_transversal():
    sys = catalog.get_system('hyperbolic-drift')
    for y in random_points(20):
        f = frame.transversal_frame(sys, y)
        Q = np.column_stack((f.u1, f.u2, f.xdir, f.gdir))
        assert np.allclose(Q.T @ Q, np.eye(4), atol=1e-12)
        assert f.area == pytest.approx(1.0, abs=1e-12)


def test_frame_is_deterministic():
    sys = catalog.get_system('hyperbolic-drift')
    y = np.array([0.1, 0.2, 0.3, 0.4])
    assert frame.transversal_frame(sys, y).matches(frame.transversal_frame(sys, y.copy()), 0.0)


def test_frame_at_origin_of_drift():
    f = frame.transversal_frame(catalog.get_system('hyperbolic-drift'), np.zeros(4))
    assert np.allclose(f.u1, np.eye(4)[1])
    assert np.allclose(f.u2, np.eye(4)[3])


def test_frame_at_critical_point():
    sys = catalog.get_system('quadratic(' + ','.join(str(v) for v in np.eye(4).reshape(-1)) + ')')
    with pytest.raises(frame.RegularityError) as excinfo:
        frame.transversal_frame(sys, np.zeros(4))
    assert excinfo.value.norm == 0.0
    assert 'below regularity threshold' in str(excinfo.value)


def test_sample_energy_surface():
    sys = catalog.get_system('hyperbolic-drift')
    sample = surface.sample_energy_surface(sys, 0.1, 50, 3, patch=system.Box.cube(1.0))
    assert len(sample) == 50
    assert sample.weights.sum() == pytest.approx(1.0)
    for y in sample.points:
        assert abs(sys.energy(y) - 0.1) <= surface.DEFAULT_PROJECTION_TOL


def test_sampling_is_reproducible():
    sys = catalog.get_system('elliptic-drift')
    a = surface.sample_energy_surface(sys, 0.0, 10, 42, patch=system.Box.cube(1.0))
    b = surface.sample_energy_surface(sys, 0.0, 10, 42, patch=system.Box.cube(1.0))
    assert all(np.array_equal(p, q) for p, q in zip(a.points, b.points))


def test_empty_level_set():
    sys = catalog.get_system('hyperbolic-drift')
    with pytest.raises(surface.EmptyLevelSetError) as excinfo:
        surface.sample_energy_surface(sys, 100.0, 5, 0, patch=system.Box.cube(1.0), max_attempts=200)
    assert 'found 0 of 5 points' in str(excinfo.value)


def test_sample_band():
    sys = catalog.get_system('translation')
    region = surface.Region(0.0, 0.25, system.Box.cube(1.0))
    sample = surface.sample_region(sys, region, 20, 0)
    assert np.allclose(sample.weights, 1 / 20)
    for y in sample.points:
        assert abs(sys.energy(y)) <= 0.25


parse_params = (
    ('translation', 'translation', []),
    ('bump-rotation(0.01, 0.1, 0.5)', 'bump-rotation', ['0.01', '0.1', '0.5']),
    ('realized(quadratic(1,2),0:0:0:0,0.1,0.2)', 'realized', ['quadratic(1,2)', '0:0:0:0', '0.1', '0.2']),
)


@pytest.mark.parametrize('text,name,args', parse_params)
def test_parse_system_id(text, name, args):
    assert catalog.parse_system_id(text) == (name, args)


catalog_error_params = (
    ('nothing', 'unknown system'),
    ('translation(1)', 'takes no arguments'),
    ('quadratic(1,2)', 'quadratic needs 16 matrix entries'),
    ('quadratic(' + ','.join(['0', '1'] + ['0'] * 14) + ')', 'symmetric'),
    ('bump-rotation(0.1,0.2', 'unbalanced parentheses'),
)


@pytest.mark.parametrize('system_id,message', catalog_error_params)
def test_catalog_errors(system_id, message):
    with pytest.raises(catalog.CatalogError) as excinfo:
        catalog.get_system(system_id)
    assert message in str(excinfo.value)


def test_list_systems():
    systems = catalog.list_systems()
    for name in ('translation', 'hyperbolic-drift', 'elliptic-drift', 'quadratic', 'bump-rotation', 'realized'):
        assert name in systems


def test_drift_exact_flow():
    sys = catalog.get_system('hyperbolic-drift')
    y, F = sys.exact_flow(np.zeros(4), 1.0)
    assert np.allclose(y, [1., 0., 0., 0.])
    block = F[np.ix_([1, 3], [1, 3])]
    assert np.allclose(block, [[cosh(1), -sinh(1)], [-sinh(1), cosh(1)]])
