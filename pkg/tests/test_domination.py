# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import exp

import numpy as np
import pytest

from hamflow import domination
from hamflow.core.catalog import get_system
from hamflow.core.system import Box, HamiltonianSystem
from hamflow.flow import IntegratorConfig, StepError, UnsupportedError, flow_point, integrate_tangent
from hamflow.lyapunov import TrivialSplittingError

EXACT = IntegratorConfig(dt=1.0, method='exact')
DRIFT_DIRECTIONS = (np.array([1., -1.]), np.array([1., 1.]))


def test_drift_is_dominated():
    report = domination.domination_scan(get_system('hyperbolic-drift'), np.zeros(4), 1, 10.0, EXACT)
    assert report.dominated
    assert not report.trivial
    assert report.classification == 'Dominated(1)'
    assert len(report.ratios) == 10
    assert report.worst == pytest.approx(exp(-2))
    assert report.times[-1] == 9.0


def test_supplied_directions():
    report = domination.domination_scan(get_system('hyperbolic-drift'), np.zeros(4), 2, 5.0, EXACT,
                                        directions=DRIFT_DIRECTIONS)
    assert len(report.ratios) == 4
    assert all(r == pytest.approx(exp(-4)) for r in report.ratios)


@pytest.mark.parametrize('m', range(1, 11))
def test_rotation_is_never_dominated(m):
    report = domination.domination_scan(get_system('elliptic-drift'), np.zeros(4), m, m + 4.0, EXACT)
    assert report.classification == 'NotDominated'
    assert len(report.ratios) == 5

def test_swapped_directions_are_not_dominated():
    stable, unstable = DRIFT_DIRECTIONS[1], DRIFT_DIRECTIONS[0]
    report = domination.domination_scan(get_system('hyperbolic-drift'), np.zeros(4), 1, 3.0, EXACT,
                                        directions=(stable, unstable))
    assert not report.dominated
    assert report.classification == 'NotDominated'


def test_rotation_is_trivial():
    report = domination.domination_scan(get_system('elliptic-drift'), np.zeros(4), 1, 6.0, EXACT)
    assert report.trivial
    assert not report.dominated
    with pytest.raises(TrivialSplittingError):
        domination.domination_scan(get_system('elliptic-drift'), np.zeros(4), 1, 6.0, EXACT, strict=True)


scan_error_params = (
    (0, 5.0, 'window m must be at least 1'),
    (3, 2.0, 'shorter than the window'),
)


@pytest.mark.parametrize('m,T,message', scan_error_params)
def test_scan_errors(m, T, message):
    with pytest.raises(domination.DominationError) as excinfo:
        domination.domination_scan(get_system('hyperbolic-drift'), np.zeros(4), m, T, EXACT)
    assert message in str(excinfo.value)


conservation_params = (
    (np.zeros(4), None),
    (np.array([0., 0.1, 0., 0.2]), (np.array([1., 0.]), np.array([0., 1.]))),
    (np.array([0.3, -0.2, 0.1, 0.05]), (np.array([1., 0.3]), np.array([-0.2, 1.]))),
)


@pytest.mark.parametrize('y0,directions', conservation_params)
def test_conservation_identity(y0, directions):
    residual = domination.conservation_identity_residual(get_system('hyperbolic-drift'), y0, 3.0, EXACT,
                                                         directions=directions, window=10.0)
    assert residual < 1e-9


def test_conservation_identity_ignores_the_speed():
    sys = get_system('hyperbolic-drift')
    y0 = np.array([0., 0.3, 0., -0.3])
    residual = domination.conservation_identity_residual(sys, y0, 5.0, EXACT, directions=DRIFT_DIRECTIONS)
    assert residual < 1e-9

    def speed(y):
        return np.linalg.norm(sys.gradient(y))

    growth = speed(flow_point(sys, y0, 5.0, EXACT)) / speed(y0)
    assert growth > 10
    # weighting both sides by the speed would break the identity by the speed ratio
    assert abs(1 - growth) > 5


def test_classify_point():
    c = domination.classify_point(get_system('hyperbolic-drift'), np.zeros(4), 3, 6.0, EXACT)
    assert c.label == 'D(1)'
    assert c.m == 1
    assert c.exponent == pytest.approx(1.0)


def test_classify_rotation():
    c = domination.classify_point(get_system('elliptic-drift'), np.zeros(4), 2, 4.0, EXACT)
    assert c.label == 'Z-candidate'
    assert c.m is None


def test_classify_escape():
    sys = get_system('translation').with_domain(Box.cube(1.0))
    c = domination.classify_point(sys, np.zeros(4), 2, 5.0, EXACT)
    assert c.label == 'escaped'
    assert c.escaped
    row = domination.scan_row(np.zeros(4), c)
    assert len(row) == len(domination.SCAN_COLUMNS)


def test_classify_flags_failed_steps():
    sys = get_system('hyperbolic-drift')
    y0 = np.array([0.1, 0.2, 0., 0.3])
    cfg = IntegratorConfig(dt=0.5, newton_max=1, newton_tol=1e-300)
    with pytest.raises(StepError):
        integrate_tangent(sys, y0, 1.0, cfg)
    c = domination.classify_point(sys, y0, 1, 3.0, cfg)
    assert c.label == 'escaped'
    assert c.escaped
    assert c.m is None


def test_classify_mixed_points():
    sys = get_system('bump-rotation')
    # inside the flat core, between the core and the tube, and away from the tube
    points = (np.array([0., 0.02, 0., 0.]), np.array([0., 0.07, 0., 0.]), np.array([0., 0.5, 0., 0.]))
    labels = [domination.classify_point(sys, y, 1, 2.0, EXACT).label for y in points]
    assert labels == ['Z-candidate', 'escaped', 'Z-candidate']


def test_classify_unsupported_method():
    sys = HamiltonianSystem('plain', lambda y: y[2])
    with pytest.raises(UnsupportedError):
        domination.classify_point(sys, np.zeros(4), 1, 2.0, EXACT)


def test_anosov_diagnostic():
    cert = domination.anosov_diagnostic(get_system('hyperbolic-drift'), 0.0, 1, 3, 1.0, 0, EXACT,
                                        patch=Box.cube(0.01))
    assert cert.contraction_m == 1
    assert cert.satisfied
    assert cert.theta < 1


anosov_error_params = (
    (0, 2.0, 'at least one sample point'),
    (3, 1.0, 'shorter than the largest window'),
)


@pytest.mark.parametrize('n,T,message', anosov_error_params)
def test_anosov_errors(n, T, message):
    with pytest.raises(domination.DominationError) as excinfo:
        domination.anosov_diagnostic(get_system('hyperbolic-drift'), 0.0, 2, n, T, 0, EXACT)
    assert message in str(excinfo.value)
