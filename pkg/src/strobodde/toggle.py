"""Delayed genetic toggle switch with slow and fast sinusoidal forcing.

    u' = alpha / (1 + v^beta) - u(t - tau) + A sin(omega t) + B sin(Omega t)
    v' = alpha / (1 + u^beta) - v(t - tau)

The slow time dependence is carried by an extra state ``that`` with
``that' = 1``, so the state is ``(u, v, that)`` and only the fast forcing is
averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .averaging import AveragedDDE
from .core import History, Mode, ModeSet, OscillatoryDDE, stroboscopic_multiple
from .dual import cos, sin
from .errors import InvalidParameters

__all__ = [
    "ToggleParams",
    "PRESETS",
    "preset",
    "toggle_history",
    "toggle_oscillatory",
    "toggle_averaged2",
    "toggle_averaged3",
    "toggle_rhs",
    "equilibrium_params",
]


@dataclass(frozen=True)
class ToggleParams:
    alpha: float = 2.5
    beta: float = 2.0
    A: float = 0.1
    omega_slow: float = 0.1
    B: float = 2.0
    Omega: float = 16 * math.pi
    tau: float = 0.5
    u0: float = 0.5
    v0: float = 2.0
    allow_small_beta: bool = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameters(f"alpha must be positive, got {self.alpha}")
        min_beta = 1.0 if self.allow_small_beta else 2.0
        if not self.beta >= min_beta:
            raise InvalidParameters(f"beta must be >= {min_beta}, got {self.beta}")
        if not self.tau > 0 or not self.Omega > 0:
            raise InvalidParameters("tau and Omega must be positive")
        stroboscopic_multiple(self.tau, self.Omega)

    def with_omega(self, Omega: float) -> "ToggleParams":
        return replace(self, Omega=Omega)


PRESETS = {
    "table1": dict(alpha=2.5, beta=2.0, A=0.1, omega_slow=0.1, B=2.0,
                   Omega=16 * math.pi, tau=0.5, u0=0.5, v0=2.0),
    "fig2": dict(alpha=2.5, beta=2.0, A=0.2, omega_slow=0.2, B=2.0,
                 Omega=4 * math.pi, tau=0.5, u0=2.0, v0=0.5),
}


def preset(name: str, **overrides) -> ToggleParams:
    try:
        base = PRESETS[name]
    except KeyError:
        raise InvalidParameters(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return ToggleParams(**{**base, **overrides})


def equilibrium_params(p: ToggleParams) -> ToggleParams:
    """Same parameters with both forcings switched off."""
    return replace(p, A=0.0, B=0.0)


def toggle_history(p: ToggleParams) -> History:
    u0, v0 = p.u0, p.v0
    return History(
        value=lambda t: (u0, v0, t),
        tau=p.tau,
        derivative=lambda t: (0.0, 0.0, 1.0),
    )


def toggle_rhs(p: ToggleParams):
    """Original real right-hand side ``f(x, y, theta)`` with ``theta = Omega t``."""
    a, b, A, w, B = p.alpha, p.beta, p.A, p.omega_slow, p.B

    def f(x, y, theta):
        u, v, th = x
        return np.array(
            [
                a / (1 + v**b) - y[0] + A * math.sin(w * th) + B * math.sin(theta),
                a / (1 + u**b) - y[1],
                1.0,
            ]
        )

    return f


def _hill_slope(a, b, s):
    """d/ds [a / (1 + s^b)]."""
    return -a * b * s ** (b - 1) / (1 + s**b) ** 2


def toggle_oscillatory(p: ToggleParams) -> OscillatoryDDE:
    a, b, A, w, B = p.alpha, p.beta, p.A, p.omega_slow, p.B

    def f0(x, y):
        u, v, th = x
        return [a / (1 + v**b) - y[0] + A * sin(w * th), a / (1 + u**b) - y[1], 1.0]

    def f0_dx(x, y):
        u, v, th = x
        return [
            [0.0, _hill_slope(a, b, v), A * w * cos(w * th)],
            [_hill_slope(a, b, u), 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ]

    def f0_dy(x, y):
        return [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]]

    def zeros(x, y):
        return np.zeros((3, 3))

    modes = ModeSet(
        {
            0: Mode(f0, f0_dx, f0_dy),
            1: Mode(lambda x, y: [-0.5j * B, 0.0, 0.0], zeros, zeros),
            -1: Mode(lambda x, y: [0.5j * B, 0.0, 0.0], zeros, zeros),
        },
        dimension=3,
        real=True,
    )
    return OscillatoryDDE(
        modes=modes,
        history=toggle_history(p),
        omega=p.Omega,
        slow_time_index=2,
        rhs=toggle_rhs(p),
    )


def _closed_form(p: ToggleParams, order: int) -> AveragedDDE:
    a, b, A, w, B, W = p.alpha, p.beta, p.A, p.omega_slow, p.B, p.Omega

    def field(x, lag, shifted):
        U, V, th = x
        Ub = U**b
        du = a / (1 + V**b) - lag[0] + A * math.sin(w * th)
        dv = a / (1 + Ub) - lag[1]
        if order >= 2:
            dv -= B / W * a * b * U ** (b - 1) / (1 + Ub) ** 2
            if shifted:
                du -= B / W
        if order >= 3:
            dv += (B / W) ** 2 * 3 * a * b * U ** (b - 2) * (Ub - b + b * Ub + 1) / (4 * (1 + Ub) ** 3)
        return np.array([du, dv, 1.0])

    def first(t, x, delayed):
        return field(x, delayed(1), False)

    def later(t, x, delayed):
        return field(x, delayed(1), True)

    # the expressions for [tau, 2 tau) and [2 tau, inf) coincide for this system
    regimes = [(0.0, first)] + [(j * p.tau, later) for j in range(1, order)]
    return AveragedDDE(order, tuple(regimes), toggle_history(p), W, 3, 1)


def toggle_averaged3(p: ToggleParams) -> AveragedDDE:
    """Closed-form third-order averaged toggle system."""
    return _closed_form(p, 3)


def toggle_averaged2(p: ToggleParams) -> AveragedDDE:
    """Closed-form second-order averaged toggle system (third-order terms dropped)."""
    return _closed_form(p, 2)
