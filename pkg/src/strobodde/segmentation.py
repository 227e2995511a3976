"""Delay problems on ``[0, L tau]`` as non-delay oscillatory systems.

The solution on ``[0, L tau]`` is cut into ``L + 1`` pieces living on
``[0, tau]``::

    x0(t) = phi(t - tau),   xl(t) = x(t + (l - 1) tau),   l = 1..L,

and stacked with a clock variable ``that`` into the vector
``xi = (that, x0, x1, ..., xL)`` of size ``1 + D (L + 1)``.  Because tau is a
multiple of the forcing period, ``xi`` obeys ``xi' = g(xi, Omega t)`` with no
delay.  :func:`patch` undoes the cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ODEMode, ODEModeSet, OscillatoryDDE, stroboscopic_multiple
from .dual import jvp as dual_jvp
from .errors import ContinuityViolation, InvalidParameters
from .integrators import DenseSolution, Tolerances, integrate_ode

__all__ = [
    "Layout",
    "SegmentedODE",
    "segment",
    "integrate_segmented",
    "patch",
    "PatchedTrajectory",
    "default_segments",
]


@dataclass(frozen=True)
class Layout:
    """Index map of ``xi = (that, x0, ..., xL)``."""

    D: int
    L: int

    @property
    def size(self) -> int:
        return 1 + self.D * (self.L + 1)

    def block(self, l: int) -> slice:
        if not 0 <= l <= self.L:
            raise IndexError(f"block {l} outside 0..{self.L}")
        start = 1 + l * self.D
        return slice(start, start + self.D)

    def pack(self, that, blocks: Sequence[Sequence]) -> np.ndarray:
        if len(blocks) != self.L + 1:
            raise InvalidParameters(f"expected {self.L + 1} blocks, got {len(blocks)}")
        parts = [np.atleast_1d(np.asarray(that))] + [np.asarray(b) for b in blocks]
        return np.concatenate(parts)

    def unpack(self, xi) -> tuple:
        xi = np.asarray(xi)
        return xi[0], [xi[self.block(l)] for l in range(self.L + 1)]


@dataclass(frozen=True)
class SegmentedODE:
    problem: OscillatoryDDE
    L: int
    layout: Layout
    big_modes: ODEModeSet

    @property
    def big_dimension(self) -> int:
        return self.layout.size

    @property
    def tau(self) -> float:
        return self.problem.tau

    def block_rhs(self, x, x_prev, theta: float) -> np.ndarray:
        """Row block ``l >= 1``: ``f(xl, x(l-1), theta)``."""
        return self.problem.f(x, x_prev, theta)

    def clock_rhs(self, that) -> np.ndarray:
        """Rows of ``that`` and ``x0``: ``(1, phi'(that - tau))``."""
        return np.concatenate([[1.0], self.problem.history.rate(that - self.tau)])

    def rhs(self, xi, theta: float) -> np.ndarray:
        """Full right-hand side ``g(xi, theta)`` of the segmented system."""
        that, blocks = self.layout.unpack(xi)
        rows = [self.clock_rhs(that)]
        for l in range(1, self.L + 1):
            rows.append(self.block_rhs(blocks[l], blocks[l - 1], theta))
        return np.concatenate(rows)

    def initial_state(self) -> np.ndarray:
        """``xi(0)``; blocks ``l >= 2`` are unknown (NaN) until chained."""
        hist = self.problem.history
        blocks = [hist(-self.tau), hist(0.0)]
        blocks += [np.full(self.layout.D, np.nan)] * (self.L - 1)
        return self.layout.pack(0.0, blocks)


def _big_modes(p: OscillatoryDDE, layout: Layout) -> ODEModeSet:
    D, L, tau = layout.D, layout.L, p.tau
    modes, hist = p.modes, p.history

    def make(k: int) -> ODEMode:
        f = modes.entries[k]

        def value(xi):
            xi = list(xi)
            xs = [xi[1 + l * D : 1 + (l + 1) * D] for l in range(L + 1)]
            if k == 0:
                out = [1.0, *hist.derivative(xi[0] - tau)]
            else:
                out = [0.0] * (1 + D)
            for l in range(1, L + 1):
                out.extend(f.value(xs[l], xs[l - 1]))
            return out

        def jvp(xi, v):
            xi = np.asarray(xi)
            v = np.asarray(v, dtype=complex)
            out = np.zeros(layout.size, dtype=complex)
            if k == 0 and v[0] != 0:
                # only needed for directions that move the clock
                out[layout.block(0)] = dual_jvp(
                    lambda z: hist.derivative(z[0] - tau), [complex(xi[0])], [v[0]]
                )
            for l in range(1, L + 1):
                x, y = xi[layout.block(l)], xi[layout.block(l - 1)]
                out[layout.block(l)] = modes.dx(k, x, y) @ v[layout.block(l)] + modes.dy(
                    k, x, y
                ) @ v[layout.block(l - 1)]
            return out

        return ODEMode(value=value, jvp=jvp)

    return ODEModeSet({k: make(k) for k in modes.letters}, layout.size, modes.real)


def segment(p: OscillatoryDDE, L: int) -> SegmentedODE:
    """Build the ``1 + D (L + 1)``-dimensional non-delay system equivalent to ``p`` on ``[0, L tau]``."""
    if p.m is None:
        stroboscopic_multiple(p.tau, p.omega)
    if int(L) != L or L < 1:
        raise InvalidParameters(f"L must be a positive integer, got {L}")
    L = int(L)
    layout = Layout(p.dimension, L)
    return SegmentedODE(p, L, layout, _big_modes(p, layout))


def default_segments(t_end: float, tau: float) -> int:
    return max(1, math.ceil(t_end / tau - 1e-12))


def _columns(sol: DenseSolution, cols: slice) -> DenseSolution:
    return DenseSolution(
        sol.t, sol.y[:, cols], sol.coef[:, :, cols], sol.breakpoints, sol.stats
    )


@dataclass(frozen=True)
class SegmentedSolution:
    clock: DenseSolution  # that on [0, tau]
    segments: list  # x0 ... xL, each a DenseSolution on [0, tau]


def integrate_segmented(
    s: SegmentedODE,
    tol: Tolerances = Tolerances(),
    *,
    history_breakpoints: Iterable[float] = (),
) -> SegmentedSolution:
    """Integrate the segmented system block by block.

    ``(that, x0)`` is integrated first from ``(0, phi(-tau))``; then ``x1``
    from ``phi(0)`` and each ``xl`` from the stored end value of ``x(l-1)``,
    reading ``x(l-1)(t)`` from its dense output.  Kinks of ``phi'`` inside
    ``[-tau, 0]`` must be listed in ``history_breakpoints``.
    """
    p = s.problem
    tau, omega = p.tau, p.omega
    h0 = min(tau, p.period) / 50
    bps = [b + tau for b in history_breakpoints]

    z0 = np.concatenate([[0.0], p.history(-tau)])
    clock = integrate_ode(
        lambda t, z: s.clock_rhs(z[0]), 0.0, tau, z0, tol, bps, first_step=h0
    )
    segments = [_columns(clock, slice(1, None))]
    x_start = p.history(0.0)
    for l in range(1, s.L + 1):
        prev = segments[-1]
        sol = integrate_ode(
            lambda t, x, prev=prev: s.block_rhs(x, prev(t), omega * t),
            0.0,
            tau,
            x_start,
            tol,
            bps,
            first_step=h0,
        )
        segments.append(sol)
        x_start = sol.y[-1]
    return SegmentedSolution(_columns(clock, slice(0, 1)), segments)


class PatchedTrajectory:
    """Continuous function on ``[-tau, L tau]`` assembled from segment pieces."""

    def __init__(self, segments: Sequence, tau: float):
        self.segments = list(segments)
        self.tau = tau
        self.L = len(self.segments) - 1

    @property
    def span(self) -> tuple[float, float]:
        return -self.tau, self.L * self.tau

    def __call__(self, t: float) -> np.ndarray:
        tau = self.tau
        if not -tau * (1 + 1e-12) <= t <= self.L * tau * (1 + 1e-12):
            raise ValueError(f"t={t} outside {self.span}")
        if t <= 0.0:
            return self.segments[0](min(max(t + tau, 0.0), tau))
        l = min(self.L, max(1, math.ceil(t / tau - 1e-12)))
        return self.segments[l](min(max(t - (l - 1) * tau, 0.0), tau))

    def sample(self, times: Iterable[float]) -> np.ndarray:
        return np.array([self(float(t)) for t in times])


def patch(segments, tau: float, *, atol: float = 1e-6) -> PatchedTrajectory:
    """Join ``X(t) = X^(l)(t - (l - 1) tau)`` into one trajectory.

    Raises :class:`ContinuityViolation` when some ``X^(l)(0)`` differs from
    ``X^(l-1)(tau)`` by more than ``atol (1 + |X|)``.
    """
    if isinstance(segments, SegmentedSolution):
        segments = segments.segments
    segments = list(segments)
    for l in range(1, len(segments)):
        a = np.asarray(segments[l - 1](tau))
        b = np.asarray(segments[l](0.0))
        gap = float(np.max(np.abs(a - b)))
        if gap > atol * (1.0 + float(np.max(np.abs(a)))):
            raise ContinuityViolation(f"junction {l}: |X({l}, 0) - X({l - 1}, tau)| = {gap:.3e}")
    return PatchedTrajectory(segments, tau)
