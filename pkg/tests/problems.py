"""Small test problems with nontrivial k != 0 modes and history."""

import math

import numpy as np

from strobodde.core import History, Mode, ModeSet, OscillatoryDDE
from strobodde.dual import cos, sin

C1 = 0.2 + 0.1j
C2 = 0.1 - 0.3j


def _mode_pair(c1, c2, s):
    """k = +1 (s = 1) or k = -1 (s = -1) mode; s flips the sign of the y0^2 term."""

    def value(x, y):
        return [c1 * x[0] * y[1], c2 * cos(x[0]) + s * 0.2j * y[0] ** 2]

    def dx(x, y):
        return np.array([[c1 * y[1], 0.0], [-c2 * math.sin(x[0]), 0.0]])

    def dy(x, y):
        return np.array([[0.0, c1 * x[0]], [s * 0.4j * y[0], 0.0]])

    return Mode(value, dx, dy)


def _f0():
    def value(x, y):
        return [-y[0] + 0.5 * sin(x[1]), -0.4 * x[1] + 0.3 * x[0] * y[1]]

    def dx(x, y):
        return np.array([[0.0, 0.5 * math.cos(x[1])], [0.3 * y[1], -0.4]])

    def dy(x, y):
        return np.array([[-1.0, 0.0], [0.0, 0.3 * x[0]]])

    return Mode(value, dx, dy)


def wavy_history(tau=1.0):
    return History(
        value=lambda t: (cos(t), 1.0 + 0.5 * sin(2 * t)),
        tau=tau,
        derivative=lambda t: (-sin(t), cos(2 * t)),
    )


def nonlinear_modes(f0=None):
    return ModeSet(
        {0: f0 or _f0(), 1: _mode_pair(C1, C2, 1.0), -1: _mode_pair(C1.conjugate(), C2.conjugate(), -1.0)},
        dimension=2,
        real=True,
    )


def nonlinear_problem(omega=16 * math.pi, tau=1.0):
    """Two-dimensional nonlinear system; tau * omega / 2 pi must be an integer."""
    return OscillatoryDDE(nonlinear_modes(), wavy_history(tau), omega)


def corrupted_problem(omega=16 * math.pi, tau=1.0, eps=1e-3):
    """As :func:`nonlinear_problem` but with a wrong entry in d f_0 / dx."""
    good = _f0()

    def dx(x, y):
        J = good.dx(x, y).copy()
        J[0, 0] += eps
        return J

    return OscillatoryDDE(nonlinear_modes(Mode(good.value, dx, good.dy)), wavy_history(tau), omega)


def linear_problem(rng, omega=8 * math.pi, tau=0.5, D=2):
    """f_k(x, y) = A_k x + B_k y with conjugate-symmetric k = +-1 matrices."""
    A0, B0 = rng.standard_normal((2, D, D)) * 0.5
    A1 = (rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))) * 0.5
    B1 = (rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))) * 0.5
    mats = {0: (A0, B0), 1: (A1, B1), -1: (A1.conj(), B1.conj())}

    def make(A, B):
        def value(x, y):
            return [sum(A[i, j] * x[j] + B[i, j] * y[j] for j in range(D)) for i in range(D)]

        return Mode(value, lambda x, y: A, lambda x, y: B)

    modes = ModeSet({k: make(*ab) for k, ab in mats.items()}, dimension=D, real=True)
    hist = History(
        value=lambda t: tuple(cos((i + 1) * t) for i in range(D)),
        tau=tau,
        derivative=lambda t: tuple(-(i + 1) * sin((i + 1) * t) for i in range(D)),
    )
    return OscillatoryDDE(modes, hist, omega)
