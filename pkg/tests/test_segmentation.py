import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from problems import linear_problem, nonlinear_problem
from strobodde.errors import ContinuityViolation, InvalidParameters
from strobodde.integrators import Tolerances, integrate_dde
from strobodde.segmentation import (
    Layout,
    default_segments,
    integrate_segmented,
    patch,
    segment,
)
from strobodde.core import stroboscopic_grid
from strobodde.toggle import preset, toggle_oscillatory
from test_integrators import linear_dde

TOL = Tolerances(1e-8, 1e-10)


@pytest.mark.parametrize(
    "make,L,size",
    [
        (lambda: linear_dde(-1.0), 2, 4),
        (lambda: linear_problem(np.random.default_rng(0)), 3, 9),
        (lambda: toggle_oscillatory(preset("table1")), 4, 16),
    ],
)
def test_big_dimension(make, L, size):
    assert segment(make(), L).big_dimension == size


def test_invalid_segment_count():
    with pytest.raises(InvalidParameters):
        segment(linear_dde(-1.0), 0)


def test_default_segments():
    assert default_segments(2.0, 0.5) == 4
    assert default_segments(2.1, 0.5) == 5
    assert default_segments(0.1, 0.5) == 1


def test_nonzero_modes_vanish_on_clock_and_history_rows():
    s = segment(toggle_oscillatory(preset("table1")), 2)
    rng = np.random.default_rng(0)
    for _ in range(5):
        xi = rng.uniform(0.1, 2.0, s.big_dimension)
        for k in (-1, 1):
            g = s.big_modes.value(k, xi)
            assert np.all(g[:4] == 0)
            assert np.any(g[4:] != 0)


@given(
    st.floats(-1, 1),
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=6, max_size=6),
)
@settings(max_examples=30, deadline=None)
def test_layout_roundtrip(that, flat):
    lay = Layout(2, 2)
    blocks = [flat[0:2], flat[2:4], flat[4:6]]
    xi = lay.pack(that, blocks)
    assert xi.size == lay.size == 7
    t2, b2 = lay.unpack(xi)
    assert t2 == that
    assert all(np.array_equal(a, b) for a, b in zip(b2, blocks))


@given(st.floats(0, 2 * math.pi), st.integers(-3, 3))
@settings(max_examples=30, deadline=None)
def test_rhs_depends_on_time_only_through_phase(theta, shift):
    p = nonlinear_problem()
    s = segment(p, 3)
    xi = np.linspace(-0.4, 0.9, s.big_dimension)
    a = s.rhs(xi, theta)
    b = s.rhs(xi, theta + 2 * math.pi * shift)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-14)


def test_big_modes_rebuild_rhs():
    s = segment(nonlinear_problem(), 2)
    xi = np.linspace(0.1, 0.7, s.big_dimension)
    theta = 1.3
    total = sum(np.exp(1j * k * theta) * s.big_modes.value(k, xi) for k in s.big_modes.letters)
    assert np.allclose(total.real, s.rhs(xi, theta), rtol=1e-14, atol=1e-14)


def test_history_block_reproduces_history():
    p = nonlinear_problem()
    seg = integrate_segmented(segment(p, 2), TOL)
    ts = np.linspace(0.0, p.tau, 41)
    dev = max(np.max(np.abs(seg.segments[0](t) - p.history(t - p.tau))) for t in ts)
    assert dev <= 10 * TOL.rel
    clock = max(abs(seg.clock(t)[0] - t) for t in ts)
    assert clock <= 1e-12


def test_linear_two_segments():
    seg = integrate_segmented(segment(linear_dde(-1.0), 2), TOL)
    assert abs(seg.segments[2](1.0)[0] + 0.5) <= 1e-8
    assert abs(seg.segments[1](1.0)[0]) <= 1e-8


def test_chaining_is_exact():
    seg = integrate_segmented(segment(toggle_oscillatory(preset("table1")), 4), TOL)
    for l in range(2, 5):
        assert np.array_equal(seg.segments[l](0.0), seg.segments[l - 1].y[-1])


def test_patch_reproduces_history_and_is_continuous():
    p = nonlinear_problem()
    X = patch(integrate_segmented(segment(p, 2), TOL), p.tau)
    assert X.span == (-1.0, 2.0)
    for t in np.linspace(-1.0, 0.0, 11):
        assert np.allclose(X(t), p.history(t), rtol=0, atol=10 * TOL.rel)
    for j in (1, 2):
        t = j * p.tau
        left, right = X(np.nextafter(t, -np.inf)), X(np.nextafter(t, np.inf))
        assert np.max(np.abs(left - right)) <= 1e-8


def test_patch_rejects_broken_chain():
    p = toggle_oscillatory(preset("table1"))
    seg = integrate_segmented(segment(p, 2), TOL)
    with pytest.raises(ContinuityViolation):
        patch([seg.segments[0], seg.segments[2], seg.segments[1]], p.tau)


@pytest.mark.parametrize(
    "make,L",
    [
        (lambda: toggle_oscillatory(preset("table1")), 4),
        (lambda: toggle_oscillatory(preset("fig2")), 6),
        (nonlinear_problem, 3),
        (lambda: linear_problem(np.random.default_rng(3)), 5),
    ],
)
def test_roundtrip_against_method_of_steps(make, L):
    p = make()
    X = patch(integrate_segmented(segment(p, L), TOL), p.tau)
    direct = integrate_dde(p, L * p.tau, TOL)
    grid = stroboscopic_grid(p, L * p.tau).times
    err = np.max(np.abs(X.sample(grid) - direct.sample(grid)))
    assert err <= 20 * TOL.rel


def test_toggle_roundtrip_against_tight_reference():
    p = toggle_oscillatory(preset("table1"))
    X = patch(integrate_segmented(segment(p, 4), TOL), p.tau)
    ref = integrate_dde(p, 2.0, Tolerances(1e-10, 1e-12))
    grid = stroboscopic_grid(p, 2.0).times
    assert np.max(np.abs(X.sample(grid) - ref.sample(grid))) <= 1e-6
