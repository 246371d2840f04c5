# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

from math import cos, cosh, pi, sin, sinh, sqrt

import numpy as np
import pytest

from hamflow import flowbox
from hamflow.core.catalog import get_system
from hamflow.flow import IntegratorConfig
from hamflow.lyapunov import SplittingEstimate
from hamflow.perturb import ValidityError, build_bumps, bump_terms, certify
from hamflow.poincare import transversal_cocycle
from hamflow.util import line_angle, rotation, unit

ALPHA = 0.01
R = 0.1
SMALL_GRID = 2000
DRIFT_BLOCK = np.array([[cosh(1), -sinh(1)], [-sinh(1), cosh(1)]])
SHEAR = np.array([[1.0, 0.5], [0.0, 1.0]])
SQUEEZE = np.diag([2.0, 0.5])


def compose(blocks, angles):
    L = np.eye(2)
    for b, a in zip(blocks, angles):
        L = b @ rotation(a) @ L
    return L


def segment(start, alpha=ALPHA, kappa=0.05, a0=0.05):
    # noinspection PyArgumentList
    return flowbox.Segment(start, alpha, R, 0.5, kappa, a0)


def test_translation_chart_is_the_identity():
    chart = flowbox.build_chart(get_system('translation'), np.zeros(4), 0.5, n=20)
    m = np.array([0.1, -0.2, 0.3, 0.05])
    assert np.allclose(chart.g(m), m, atol=1e-14)
    assert np.allclose(chart.g_inv(m), m, atol=1e-14)
    assert chart.residuals.worst < 1e-8
    assert chart.residuals.failures == 0


def test_drift_chart():
    sys = get_system('hyperbolic-drift')
    center = np.array([0.0, 0.1, 0.0, 0.2])
    chart = flowbox.build_chart(sys, center, 0.05, n=30, seed=2)
    assert np.allclose(chart.g(center), 0.0, atol=1e-14)
    assert np.allclose(chart.g_inv(np.zeros(4)), center, atol=1e-14)
    assert chart.transversality(center) == pytest.approx(1.0)
    cert = chart.residuals
    assert cert.n_samples == 30
    assert cert.sympl_residual < 1e-6
    assert cert.conj_residual < 1e-12
    assert cert.field_residual < 1e-6
    assert cert.inverse_residual < 1e-10


def test_chart_certificate_text():
    chart = flowbox.build_chart(get_system('translation'), np.zeros(4), 0.5, n=5)
    text = chart.residuals.to_text()
    assert flowbox.ChartCertificate.from_text(text) == chart.residuals
    with pytest.raises(flowbox.FlowboxError) as excinfo:
        flowbox.ChartCertificate.from_text('sympl_residual=0.1')
    assert 'malformed chart certificate' in str(excinfo.value)


def test_chart_radius_must_be_positive():
    with pytest.raises(flowbox.FlowboxError) as excinfo:
        flowbox.build_chart(get_system('translation'), np.zeros(4), 0.0)
    assert 'chart radius must be positive' in str(excinfo.value)


def test_chart_at_critical_point():
    sys = get_system('quadratic(' + ','.join(str(v) for v in np.eye(4).reshape(-1)) + ')')
    with pytest.raises(flowbox.TransversalityError):
        flowbox.build_chart(sys, np.zeros(4), 0.1, n=0)


def test_realized_translation_is_the_model_bump():
    realized = flowbox.realized_system(get_system('translation'), np.zeros(4), ALPHA, R)
    model = get_system(f'bump-rotation({ALPHA},{R},0.5)')
    for m in (np.array([0.3, 0.02, 0.01, -0.03]), np.array([0.7, 0.06, -0.02, 0.01]), np.array([0.5, 0.3, 0., 0.])):
        assert realized.energy(m) == pytest.approx(model.energy(m), abs=1e-14)
        assert np.allclose(realized.gradient(m), model.gradient(m), atol=1e-8)
    assert realized.name == f'realized(translation,0.0:0.0:0.0:0.0,{ALPHA!r},{R!r})'


def test_realized_from_catalog():
    sys = get_system(f'realized(translation,0:0:0:0,{ALPHA},{R})')
    y, F = sys.exact_flow(np.array([0.0, 0.02, 0.0, 0.0]), 1.0)
    assert np.allclose(y, [1.0, 0.02 * cos(ALPHA), 0.0, 0.02 * sin(ALPHA)], atol=1e-10)
    assert np.allclose(F[np.ix_((1, 3), (1, 3))], rotation(ALPHA), atol=1e-7)


def test_realized_exact_flow_away_from_the_box():
    realized = flowbox.realized_system(get_system('translation'), np.zeros(4), ALPHA, R)
    y, F = realized.exact_flow(np.array([-2.0, 0.9, 0.0, 0.0]), 1.0)
    assert np.allclose(y, [-1.0, 0.9, 0.0, 0.0])
    assert np.allclose(F, np.eye(4))
    with pytest.raises(ValidityError) as excinfo:
        realized.exact_flow(np.array([-2.0, 0.0, 0.0, 0.0]), 3.0)
    assert 'enters the flowbox' in str(excinfo.value)


def test_realized_with_zero_rotation_is_the_base():
    base = get_system('hyperbolic-drift')
    realized = flowbox.realized_system(base, np.array([0.0, 0.1, 0.0, 0.0]), 0.0, R)
    m = np.array([0.3, 0.1, 0.01, 0.02])
    assert realized.energy(m) == base.energy(m)
    assert np.array_equal(realized.gradient(m), base.gradient(m))


def test_check_flowbox_orbit():
    assert flowbox.check_flowbox_orbit(get_system('translation'), np.zeros(4), R) == pytest.approx(0.4, abs=0.011)
    sys = get_system('quadratic(' + ','.join(str(v) for v in np.eye(4).reshape(-1)) + ')')
    # harmonic oscillator: the orbit closes after 2 pi
    with pytest.raises(flowbox.FlowboxOverlapError) as excinfo:
        flowbox.check_flowbox_orbit(sys, np.array([1.0, 0.0, 0.0, 0.0]), R, T=2 * pi)
    assert excinfo.value.distance <= 2 * R


def test_realize_rotation_on_translation():
    sys = get_system('translation')
    realized, cert = flowbox.realize_rotation(sys, np.zeros(4), ALPHA, R, 1.0, n_chart=10, n_disk=4,
                                              n_transport=4, grid=SMALL_GRID)
    assert cert.rotation_error < 1e-6
    assert cert.kappa_fraction == 0.0
    assert cert.disk_radius == pytest.approx(0.025)
    assert cert.c2_bound <= cert.universal_constant
    assert realized.name.startswith('realized(translation,')

    schedule = flowbox.schedule_from_certificate(sys, np.zeros(4), cert)
    assert schedule.length_T == 1.0
    assert np.allclose(schedule.end, [1.0, 0.0, 0.0, 0.0])
    assert schedule.angles() == [ALPHA]


def test_translation_realization_keeps_the_model_certificate():
    _, cert = flowbox.realize_rotation(get_system('translation'), np.zeros(4), ALPHA, R, 1.0, n_chart=10, n_disk=4,
                                       n_transport=8, grid=SMALL_GRID)
    model = certify(build_bumps(R, 0.5, alpha=ALPHA), 1.0, SMALL_GRID, strict=False)
    for field in ('c0', 'c1', 'c2', 'c1_bound', 'c2_bound'):
        assert getattr(cert, field) == pytest.approx(getattr(model, field), abs=1e-10)


def test_realized_rotation_on_the_drift():
    sys = get_system('hyperbolic-drift')
    realized, cert = flowbox.realize_rotation(sys, np.zeros(4), ALPHA, R, 1.0, n_chart=20, n_disk=8,
                                              n_transport=8, grid=SMALL_GRID)
    assert cert.rotation_error <= 1e-3
    assert cert.kappa_fraction <= 0.1

    # gauss2 runs on the realized gradient, not on its closed form
    chart = flowbox.build_chart(sys, np.zeros(4), R, n=0)
    y = chart.g_inv(np.array([0.0, 0.01, 0.0, -0.005]))
    integrated = transversal_cocycle(realized, y, 1.0, IntegratorConfig(dt=1e-2, method='gauss2')).Phi
    closed = transversal_cocycle(realized, y, 1.0, IntegratorConfig(dt=1.0, method='exact')).Phi
    ref = transversal_cocycle(sys, y, 1.0, IntegratorConfig(dt=1.0, method='exact')).Phi
    assert np.allclose(integrated, closed, atol=1e-8)
    assert np.linalg.norm(integrated - ref @ rotation(ALPHA), 2) <= 1e-3
    assert np.linalg.norm(integrated - ref, 2) > 1e-3


def test_schedule_text_round_trip():
    s = flowbox.RealizationSchedule(np.zeros(4), np.array([3.0, 0., 0., 0.]), 3.0, (segment(0.0), segment(2.0)),
                                    0.2, 1.0).validate()
    back = flowbox.RealizationSchedule.from_text(s.to_text())
    assert np.array_equal(back.base, s.base)
    assert np.array_equal(back.end, s.end)
    assert back.segments == s.segments
    assert (back.length_T, back.kappa_budget, back.epsilon) == (3.0, 0.2, 1.0)


def test_malformed_schedule():
    with pytest.raises(flowbox.ScheduleError) as excinfo:
        flowbox.RealizationSchedule.from_text('segments=1\nbase=0,0,0,0\n')
    assert 'malformed schedule' in str(excinfo.value)


schedule_error_params = (
    ((segment(0.0), segment(0.5)), 3.0, 0.2, 'overlaps the previous one'),
    ((segment(0.0, alpha=0.1),), 3.0, 0.2, 'exceeds alpha0'),
    ((segment(2.5),), 3.0, 0.2, 'past the schedule length'),
    ((segment(0.0, kappa=0.3),), 3.0, 0.2, 'over the budget'),
    ((), 3.0, 1.0, 'kappa budget must be in [0, 1)'),
)


@pytest.mark.parametrize('segments,length,budget,message', schedule_error_params)
def test_schedule_errors(segments, length, budget, message):
    with pytest.raises(flowbox.ScheduleError) as excinfo:
        flowbox.RealizationSchedule(np.zeros(4), np.zeros(4), length, segments, budget, 1.0).validate()
    assert message in str(excinfo.value)


def test_schedule_apply():
    s = flowbox.RealizationSchedule(np.zeros(4), np.zeros(4), 2.0, (segment(1.0),), 0.1, 1.0)
    assert s.angles() == [0.0, ALPHA]
    out = s.apply([SHEAR, SQUEEZE])
    assert np.array_equal(out[0], SHEAR)
    assert np.allclose(out[1], SQUEEZE @ rotation(ALPHA))
    with pytest.raises(flowbox.ScheduleError) as excinfo:
        s.apply([SHEAR])
    assert 'unit blocks needed' in str(excinfo.value)


def test_concatenate():
    first = flowbox.RealizationSchedule.single(np.zeros(4), np.array([1., 0., 0., 0.]), segment(0.0), 0.5)
    second = flowbox.RealizationSchedule.single(np.array([1., 0., 0., 0.]), np.array([2., 0., 0., 0.]),
                                                segment(0.0, kappa=0.1), 1.0)
    both = flowbox.concatenate(first, second)
    assert both.length_T == 2.0
    assert [s.start for s in both.segments] == [0.0, 1.0]
    assert both.kappa_budget == pytest.approx(0.15)
    assert both.epsilon == 1.0
    assert np.array_equal(both.end, second.end)
    empty = flowbox.RealizationSchedule.empty(np.zeros(4))
    assert flowbox.concatenate(empty, first).segments == first.segments


def test_concatenate_errors():
    first = flowbox.RealizationSchedule.single(np.zeros(4), np.array([1., 0., 0., 0.]), segment(0.0), 0.5)
    with pytest.raises(flowbox.ScheduleError) as excinfo:
        flowbox.concatenate(first, first)
    assert 'does not continue' in str(excinfo.value)
    heavy = flowbox.RealizationSchedule.single(np.array([1., 0., 0., 0.]), np.zeros(4), segment(0.0, kappa=0.96),
                                               0.5)
    with pytest.raises(flowbox.ScheduleError) as excinfo:
        flowbox.concatenate(first, heavy)
    assert 'not below 1' in str(excinfo.value)


def test_exchange_on_identity_blocks():
    ex = flowbox.exchange_schedule([np.eye(2)] * 2, pi / 2, n_plus=np.array([1., 0.]), n_minus=np.array([0., 1.]))
    assert ex.bound == pytest.approx(pi / 4, abs=1e-9)
    assert [abs(a) for a in ex.angles] == pytest.approx([pi / 4, pi / 4], abs=1e-9)
    assert ex.achieved < flowbox.EXCHANGE_TOL
    assert line_angle(ex.matrix @ np.array([1., 0.]), np.array([0., 1.])) < 1e-9


def test_exchange_swaps_the_drift_directions():
    ex = flowbox.exchange_schedule([DRIFT_BLOCK], pi / 2)
    assert abs(ex.angles[0]) == pytest.approx(pi / 2)
    assert ex.ratio == pytest.approx(np.exp(-2))
    assert line_angle(ex.matrix @ np.array([1., -1.]), np.array([1., 1.])) < 1e-6


def test_exchange_not_needed():
    ex = flowbox.exchange_schedule([np.eye(2)], 0.1, n_plus=np.array([1., 1.]), n_minus=np.array([-1., -1.]))
    assert ex.angles == (0.0,)
    assert ex.bound == 0.0


def test_no_exchange():
    with pytest.raises(flowbox.NoExchangeError) as excinfo:
        flowbox.exchange_schedule([np.eye(2)] * 2, 0.5, n_plus=np.array([1., 0.]), n_minus=np.array([0., 1.]))
    assert excinfo.value.gap == pytest.approx(pi / 2 - 1.0)
    assert 'target missed by' in str(excinfo.value)


exchange_error_params = (
    ([], 0.1, 'at least one block'),
    ([np.diag([1.0, -1.0])], 0.1, 'does not preserve orientation'),
    ([np.eye(2)], -0.1, 'alpha0 must be non-negative'),
)


@pytest.mark.parametrize('blocks,alpha0,message', exchange_error_params)
def test_exchange_errors(blocks, alpha0, message):
    with pytest.raises(flowbox.FlowboxError) as excinfo:
        flowbox.exchange_schedule(blocks, alpha0)
    assert message in str(excinfo.value)


def grid_gap(blocks, alpha0, n_plus, n_minus, points=201):
    """Smallest line angle to the target over a grid of rotation angles."""
    axis = np.linspace(-alpha0, alpha0, points)
    grids = np.meshgrid(*[axis] * len(blocks), indexing='ij')
    v = np.tile(n_plus, (grids[0].size, 1))
    for b, a in zip(blocks, grids):
        c, s = np.cos(a.ravel()), np.sin(a.ravel())
        v = np.column_stack([c * v[:, 0] - s * v[:, 1], s * v[:, 0] + c * v[:, 1]]) @ np.asarray(b).T
    cross = np.abs(v[:, 0] * n_minus[1] - v[:, 1] * n_minus[0])
    return float(np.min(np.arctan2(cross, np.abs(v @ n_minus))))


def check_against_grid(blocks, alpha0, n_plus, n_minus):
    points = 201 if len(blocks) < 3 else 61
    best = grid_gap(blocks, alpha0, n_plus, n_minus, points)
    slack = 40 * alpha0 / (points - 1)
    try:
        ex = flowbox.exchange_schedule(blocks, alpha0, n_plus=n_plus, n_minus=n_minus)
    except flowbox.NoExchangeError as e:
        assert e.gap - 1e-9 <= best <= e.gap + slack
    else:
        assert all(abs(a) <= alpha0 + 1e-12 for a in ex.angles)
        assert line_angle(compose(blocks, ex.angles) @ n_plus, n_minus) < flowbox.EXCHANGE_TOL
        assert best <= slack


oracle_params = (
    ([SHEAR, SQUEEZE], 0.2),
    ([SHEAR, SQUEEZE], 0.5),
    ([SHEAR, SQUEEZE], 1.2),
    ([SQUEEZE, SHEAR, rotation(0.3) @ SQUEEZE], 0.3),
    ([SQUEEZE, SHEAR, rotation(0.3) @ SQUEEZE], 0.8),
)


@pytest.mark.parametrize('blocks,alpha0', oracle_params)
def test_exchange_against_grid_search(blocks, alpha0):
    check_against_grid(blocks, alpha0, np.array([1., 0.]), np.array([0., 1.]))


def random_block(rng):
    s = rng.uniform(1.0, 1.5)
    return rotation(rng.uniform(-pi, pi)) @ np.diag([s, 1 / s]) @ rotation(rng.uniform(-pi, pi))


@pytest.mark.parametrize('seed', range(100))
def test_exchange_against_grid_search_on_random_blocks(seed):
    rng = np.random.default_rng(seed)
    blocks = [random_block(rng) for _ in range(rng.integers(1, 4))]
    check_against_grid(blocks, rng.uniform(0.05, 1.0), unit(rng.normal(size=2)), unit(rng.normal(size=2)))


def drift_splitting():
    # noinspection PyArgumentList
    return SplittingEstimate(np.array([1., -1.]) / sqrt(2), np.array([1., 1.]) / sqrt(2), pi / 2, 10.0, 10.0,
                             np.zeros(4), 1.0)


def test_decay_demo():
    result = flowbox.decay_demo([DRIFT_BLOCK] * 40, drift_splitting(), 0.2, pi / 2)
    assert result.raw_exponent >= 0.9
    assert result.raw_exponent == pytest.approx(1.0)
    assert result.value < 0.2
    assert result.m == 1
    assert result.window_start == 19
    assert len(result.angles) == 1


def test_decay_demo_below_target():
    result = flowbox.decay_demo([rotation(0.3)] * 10, drift_splitting(), 0.2, 0.1)
    assert result.value == result.raw_exponent == pytest.approx(0.0, abs=1e-12)
    assert result.angles == ()


def test_decay_demo_without_exchange():
    with pytest.raises(flowbox.NoExchangeError):
        flowbox.decay_demo([DRIFT_BLOCK] * 6, drift_splitting(), 0.2, 0.1, m_max=2)


def test_bump_of_the_realized_chart_matches_the_model():
    # the realized system subtracts alpha * B in chart coordinates; for the translation chart that is B itself
    profile = build_bumps(R, 0.5, alpha=ALPHA)
    z = np.array([[0.4, 0.01, 0.0, 0.02]])
    realized = flowbox.realized_system(get_system('translation'), np.zeros(4), ALPHA, R)
    assert realized.energy(z[0]) == pytest.approx(z[0, 2] - ALPHA * bump_terms(profile, z)[0][0], abs=1e-15)
    cert = certify(profile, 1.0, SMALL_GRID, rotation_samples=0)
    assert cert.support_ok
