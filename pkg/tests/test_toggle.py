import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strobodde.averaging import averaged_order1, averaged_order2
from strobodde.errors import InvalidParameters, NonStroboscopic
from strobodde.integrators import Tolerances, integrate_dde
from strobodde.toggle import (
    PRESETS,
    ToggleParams,
    equilibrium_params,
    preset,
    toggle_averaged2,
    toggle_averaged3,
    toggle_oscillatory,
    toggle_rhs,
)

Q = preset("table1")
states = st.tuples(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(-5.0, 5.0))


def test_fast_modes_cancel_and_rebuild_sine():
    p = toggle_oscillatory(Q)
    x = y = [1.0, 1.0, 0.0]
    assert np.all(p.modes.value(1, x, y) + p.modes.value(-1, x, y) == 0)
    for th in np.linspace(0, 2 * math.pi, 9):
        f = np.exp(1j * th) * p.modes.value(1, x, y) + np.exp(-1j * th) * p.modes.value(-1, x, y)
        assert np.allclose(f, [Q.B * math.sin(th), 0, 0], rtol=0, atol=1e-15)


@given(states, states, st.floats(0.0, 40.0))
@settings(max_examples=50, deadline=None)
def test_modes_rebuild_original_rhs(x, y, t):
    p = toggle_oscillatory(Q)
    theta = Q.Omega * t
    rebuilt = p.modes.forcing(x, y, theta)
    direct = toggle_rhs(Q)(np.array(x), np.array(y), theta)
    assert np.allclose(rebuilt.real, direct, rtol=1e-14, atol=1e-14)
    assert np.abs(rebuilt.imag).max() <= 1e-14


def test_unforced_equilibrium_zeroes_mean_field():
    for name, (u, v) in (("table1", (0.5, 2.0)), ("fig2", (2.0, 0.5))):
        q = equilibrium_params(preset(name))
        x = np.array([u, v, 0.3])
        assert np.allclose(toggle_oscillatory(q).modes.value(0, x, x)[:2], 0, atol=1e-15)


def test_jacobian_at_reference_state_matches_differences():
    p = toggle_oscillatory(Q)
    x, y = np.array([2.0, 0.5, 0.0]), np.array([2.0, 0.5, -0.5])
    J = p.modes.dx(0, x, y)
    h = 1e-6
    fd = (p.modes.value(0, x + [h, 0, 0], y) - p.modes.value(0, x - [h, 0, 0], y)) / (2 * h)
    assert np.allclose(J[:, 0], fd, rtol=1e-6, atol=1e-9)
    assert abs(J[1, 0] - (-2.5 * 2 * 2 / 25)) < 1e-15
    assert p.modes.jacobian_error(x, y) < 1e-6


def test_presets():
    t1, f2 = preset("table1"), preset("fig2")
    assert (t1.alpha, t1.beta, t1.A, t1.omega_slow, t1.B, t1.tau, t1.u0, t1.v0) == (2.5, 2.0, 0.1, 0.1, 2.0, 0.5, 0.5, 2.0)
    assert (f2.A, f2.omega_slow, f2.Omega, f2.u0, f2.v0) == (0.2, 0.2, 4 * math.pi, 2.0, 0.5)
    assert set(PRESETS) == {"table1", "fig2"}
    with pytest.raises(InvalidParameters):
        preset("nope")


def test_parameter_validation():
    with pytest.raises(InvalidParameters):
        ToggleParams(beta=1.5)
    assert ToggleParams(beta=1.5, allow_small_beta=True).beta == 1.5
    with pytest.raises(InvalidParameters):
        ToggleParams(beta=0.5, allow_small_beta=True)
    with pytest.raises(InvalidParameters):
        ToggleParams(alpha=0.0)
    with pytest.raises(NonStroboscopic):
        ToggleParams(Omega=5.0)


def hand_dv(q, U, lag_v, order):
    a, b, B, W = q.alpha, q.beta, q.B, q.Omega
    out = a / (1 + U**b) - lag_v - B / W * a * b * U ** (b - 1) / (1 + U**b) ** 2
    if order == 3:
        out += (B / W) ** 2 * 3 * a * b * U ** (b - 2) * (U**b - b + b * U**b + 1) / (4 * (1 + U**b) ** 3)
    return out


def test_third_order_at_reference_state():
    q = preset("fig2")
    a3 = toggle_averaged3(q)
    x, lag = np.array([2.0, 0.5, 0.0]), np.array([1.0, 1.5, -0.5])
    got = a3.rhs(0.7, x, {1: lag}.__getitem__)
    W = 4 * math.pi
    corrections = -(2 / W) * (2.5 * 2 * 2) / (1 + 4) ** 2 + (4 / W**2) * (3 * 2.5 * 2 * (4 - 2 + 8 + 1)) / (4 * 125)
    assert abs(got[1] - (2.5 / 5 - 1.5 + corrections)) < 1e-15
    assert abs(got[1] - hand_dv(q, 2.0, 1.5, 3)) < 1e-15
    assert abs(got[0] - (2.5 / 1.25 - 1.0 - 2 / W)) < 1e-15


def test_regime_structure():
    a3, a2 = toggle_averaged3(Q), toggle_averaged2(Q)
    assert [s for s, _ in a3.regimes] == [0.0, 0.5, 1.0]
    assert [s for s, _ in a2.regimes] == [0.0, 0.5]
    x, lag = np.array([1.0, 1.0, 0.1]), np.array([0.5, 2.0, -0.4])
    d = {1: lag}.__getitem__
    # the mean-shift term in dU switches on at tau
    assert a3.rhs(0.3, x, d)[0] - a3.rhs(0.6, x, d)[0] == pytest.approx(Q.B / Q.Omega, rel=1e-12)
    assert np.array_equal(a3.rhs(0.7, x, d), a3.rhs(1.3, x, d))


def test_zero_fast_amplitude_gives_first_order_system():
    q = preset("table1", B=0.0)
    a1 = averaged_order1(toggle_oscillatory(q))
    x, lag = np.array([1.4, 0.3, 0.9]), np.array([0.5, 2.0, 0.4])
    d = {1: lag, 2: lag}.__getitem__
    for t in (0.1, 0.7, 1.5):
        ref = a1.rhs(t, x, d)
        for a in (toggle_averaged2(q), toggle_averaged3(q), averaged_order2(toggle_oscillatory(q))):
            assert np.allclose(a.rhs(t, x, d), ref, rtol=1e-15, atol=0)


def test_order3_minus_order2_scales_like_inverse_square():
    rng = np.random.default_rng(3)
    xs = [np.array([rng.uniform(0.2, 3), rng.uniform(0.2, 3), 0.0]) for _ in range(20)]
    lag = np.array([0.5, 2.0, -0.5])

    def spread(W):
        q = Q.with_omega(W)
        a2, a3 = toggle_averaged2(q), toggle_averaged3(q)
        d = {1: lag}.__getitem__
        return max(np.max(np.abs(a3.rhs(0.8, x, d) - a2.rhs(0.8, x, d))) for x in xs)

    for W in (16 * math.pi, 64 * math.pi):
        assert 3.5 <= spread(W) / spread(2 * W) <= 4.5


@pytest.mark.parametrize("name", ["table1", "fig2"])
def test_all_systems_hold_equilibrium(name):
    q = equilibrium_params(preset(name))
    p = toggle_oscillatory(q)
    tol = Tolerances(1e-8, 1e-10)
    for system in (p, averaged_order1(p), averaged_order2(p), toggle_averaged2(q), toggle_averaged3(q)):
        sol = integrate_dde(system, 2.0, tol)
        assert np.abs(sol.y[:, :2] - [q.u0, q.v0]).max() <= 1e-8
