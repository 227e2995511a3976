"""Embedded Runge-Kutta integration with dense output, and method of steps.

The one-step method is the Dormand-Prince 5(4) pair (FSAL, seven stages)
with Hairer's continuous extension of order 4.  Steps never straddle a
breakpoint: the interval ``[t0, t1]`` is cut at every breakpoint and the
right-hand side is re-evaluated from scratch at each cut, so a rhs that jumps
there is only ever sampled on the correct side.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import OscillatoryDDE, stroboscopic_multiple
from .errors import (
    HistoryEvaluationOutOfRange,
    InvalidParameters,
    MaxStepsExceeded,
    OutOfSpan,
    RealnessViolation,
    StepSizeUnderflow,
)

__all__ = [
    "Tolerances",
    "Stats",
    "DenseSolution",
    "integrate_ode",
    "integrate_dde",
    "sample",
    "fixed_step_solve",
    "delay_breakpoints",
]

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B4
# Hairer's dense output coefficients for the fifth-stage correction.
_D = np.array(
    [
        -12715105075 / 11282082432,
        0.0,
        87487479700 / 32700410799,
        -10690763975 / 1880347072,
        701980252875 / 199316789632,
        -1453857185 / 822651844,
        69997945 / 29380423,
    ]
)

ORDER = 5
EMBEDDED_ORDER = 4
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-8
    abs: float = 1e-10

    def __post_init__(self):
        if not (self.rel >= 1e-14 and self.abs >= 1e-16):
            raise InvalidParameters(f"tolerances too small: rel={self.rel}, abs={self.abs}")

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(self.rel * factor, self.abs * factor)


@dataclass(frozen=True)
class Stats:
    n_steps: int
    n_rejected: int
    nfev: int
    wall_time: float


class _Builder:
    """Growing piecewise interpolant; readable while integration proceeds."""

    def __init__(self, t0: float, y0: np.ndarray):
        self.t = [t0]
        self.y = [y0]
        self.coef: list[np.ndarray] = []
        self.n_steps = 0
        self.n_rejected = 0
        self.nfev = 0

    def append(self, t_new: float, y_new: np.ndarray, coef: np.ndarray) -> None:
        self.t.append(t_new)
        self.y.append(y_new)
        self.coef.append(coef)

    def __call__(self, s: float) -> np.ndarray:
        i = bisect.bisect_right(self.t, s) - 1
        if i < 0 or s > self.t[-1]:
            raise OutOfSpan(f"t={s} outside the computed range [{self.t[0]}, {self.t[-1]}]")
        if self.t[i] == s:
            return self.y[i]
        return _hermite(self.t[i], self.t[i + 1], self.y[i], self.coef[i], s)


def _hermite(t0, t1, y0, coef, s):
    th = (s - t0) / (t1 - t0)
    th1 = 1.0 - th
    return y0 + th * (coef[0] + th1 * (coef[1] + th * (coef[2] + th1 * coef[3])))


class DenseSolution:
    """Piecewise-quartic trajectory produced by :func:`integrate_ode`/:func:`integrate_dde`.

    When ``history`` is given the solution also answers for
    ``history.tau``-long times before the first mesh point.
    """

    def __init__(self, t, y, coef, breakpoints=(), stats=None, history=None):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y)
        self.coef = np.asarray(coef)
        self.breakpoints = tuple(breakpoints)
        self.stats = stats
        self.history = history

    @property
    def span(self) -> tuple[float, float]:
        start = self.t[0] - self.history.tau if self.history is not None else self.t[0]
        return float(start), float(self.t[-1])

    @property
    def segments(self) -> list[tuple[tuple[float, float], np.ndarray]]:
        return [((self.t[i], self.t[i + 1]), self.coef[i]) for i in range(len(self.coef))]

    @property
    def dimension(self) -> int:
        return self.y.shape[1]

    def __call__(self, s: float) -> np.ndarray:
        t = self.t
        if s < t[0]:
            if self.history is not None and s >= self.span[0] - 1e-12 * abs(self.span[0]):
                return self.history(s)
            raise OutOfSpan(f"t={s} before the span {self.span}")
        if s > t[-1]:
            raise OutOfSpan(f"t={s} after the span {self.span}")
        i = int(np.searchsorted(t, s, side="right")) - 1
        if t[i] == s:
            return self.y[i]
        return _hermite(t[i], t[i + 1], self.y[i], self.coef[i], s)

    def sample(self, times: Iterable[float]) -> np.ndarray:
        return np.array([self(float(s)) for s in times])


def sample(sol: DenseSolution, times: Iterable[float]) -> np.ndarray:
    """Evaluate ``sol`` at each of ``times``; rows are states."""
    return sol.sample(times)


def _rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.mean(np.abs(x) ** 2)))


def _initial_step(rhs, t0, y0, f0, tol: Tolerances, span: float) -> float:
    sc = tol.abs + tol.rel * np.abs(y0)
    d0, d1 = _rms(y0 / sc), _rms(f0 / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    return min(100 * h0, h1, span)


def _step(rhs, t, y, f, h, t_last):
    """One Dormand-Prince step; ``t_last`` is used for stages sitting on the right end."""
    K = np.empty((7, y.size), dtype=y.dtype)
    K[0] = f
    for s in range(1, 7):
        ts = t + _C[s] * h if _C[s] < 1.0 else t_last
        K[s] = rhs(ts, y + h * (np.dot(_A[s], K[:s])))
    y_new = y + h * np.dot(_B[:6], K[:6])
    return y_new, K


def _advance(rhs, t0, t1, y0, h, tol, max_step, b: _Builder, min_step, max_steps):
    """Integrate exactly from ``t0`` to ``t1``; returns (y1, last accepted step size)."""
    t, y = t0, y0
    f = rhs(t, y)
    b.nfev += 1
    while t < t1:
        h = min(h, max_step)
        h_wanted = h
        final = t + h >= t1 - 1e-12 * max(abs(t1), 1.0)
        if final:
            h = t1 - t
        rejected = False
        while True:
            if h < min_step:
                raise StepSizeUnderflow(f"step size {h:.3e} at t={t!r} below {min_step:.3e}")
            if b.n_steps + b.n_rejected >= max_steps:
                raise MaxStepsExceeded(f"more than {max_steps} steps at t={t!r}")
            t_new = t1 if final else t + h
            # evaluate c = 1 stages just left of an interval end
            t_last = np.nextafter(t1, t0) if final else t_new
            y_new, K = _step(rhs, t, y, f, h, t_last)
            b.nfev += 6
            sc = tol.abs + tol.rel * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(h * np.dot(_E, K) / sc)
            if err <= 1.0:
                break
            rejected = True
            b.n_rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err ** (-1 / ORDER))
            final = False
        # dense output coefficients (Hairer)
        dy = y_new - y
        bspl = h * K[0] - dy
        coef = np.stack([dy, bspl, dy - h * K[6] - bspl, h * np.dot(_D, K)])
        b.append(t_new, y_new, coef)
        b.n_steps += 1
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = min(MAX_FACTOR, SAFETY * err ** (-1 / ORDER))
        if rejected:
            factor = min(1.0, factor)
        t, y, f = t_new, y_new, K[6]
        # a step shortened to hit t1 should not shrink the next interval's first step
        h = max(h * factor, h_wanted) if final and not rejected else h * factor
    return y, h


def _cuts(t0: float, t1: float, breakpoints: Iterable[float]) -> list[float]:
    inner = sorted({float(b) for b in breakpoints if t0 < b < t1})
    return [t0, *inner, t1]


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: Sequence[float],
    tol: Tolerances = Tolerances(),
    breakpoints: Iterable[float] = (),
    *,
    first_step: float | None = None,
    max_step: float = math.inf,
    max_steps: int = 1_000_000,
) -> DenseSolution:
    """Adaptive Dormand-Prince integration of ``y' = rhs(t, y)`` on ``[t0, t1]``."""
    if not t1 > t0:
        raise InvalidParameters(f"need t1 > t0, got [{t0}, {t1}]")
    y0 = np.array(y0, dtype=float if np.isrealobj(np.asarray(y0)) else complex)
    rhs_ = _as_array_rhs(rhs, y0.dtype)
    start = time.perf_counter()
    cuts = _cuts(t0, t1, breakpoints)
    b = _Builder(t0, y0)
    if first_step is None:
        f0 = rhs_(t0, y0)
        b.nfev += 2
        h = _initial_step(rhs_, t0, y0, f0, tol, cuts[1] - cuts[0])
    else:
        h = first_step
    min_step = 1e-14 * (t1 - t0)
    y = y0
    for a, c in zip(cuts[:-1], cuts[1:]):
        y, h = _advance(rhs_, a, c, y, h, tol, max_step, b, min_step, max_steps)
    return _finish(b, cuts[1:-1], start)


def _as_array_rhs(rhs, dtype):
    def wrapped(t, y):
        return np.asarray(rhs(t, y), dtype=dtype)

    return wrapped


def _finish(b: _Builder, breakpoints, start, history=None) -> DenseSolution:
    stats = Stats(b.n_steps, b.n_rejected, b.nfev, time.perf_counter() - start)
    coef = np.array(b.coef) if b.coef else np.empty((0, 4, len(b.y[0])))
    return DenseSolution(b.t, np.array(b.y), coef, breakpoints, stats, history)


def fixed_step_solve(rhs, t0: float, t1: float, y0, n_steps: int, *, embedded: bool = False):
    """Constant-step Dormand-Prince solution at ``t1`` (order 5, or 4 with ``embedded``)."""
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / n_steps
    weights = _B4 if embedded else _B
    rhs_ = _as_array_rhs(rhs, y.dtype)
    for i in range(n_steps):
        t = t0 + i * h
        _, K = _step(rhs_, t, y, rhs_(t, y), h, t + h)
        y = y + h * np.dot(weights, K)
    return y


def delay_breakpoints(tau: float, t_end: float, extra: Iterable[float] = ()) -> list[float]:
    """Multiples of ``tau`` inside ``(0, t_end)`` plus ``extra``, sorted and unique."""
    n = math.ceil(t_end / tau)
    pts = {j * tau for j in range(1, n + 1) if j * tau < t_end}
    pts.update(float(e) for e in extra if 0 < e < t_end)
    return sorted(pts)


@dataclass(frozen=True)
class _DelaySystem:
    history: object
    tau: float
    dimension: int
    regimes: tuple  # ((start, rhs(t, x, delayed)), ...), starts ascending from 0
    first_step: float


def _delay_system(problem) -> _DelaySystem:
    if isinstance(problem, OscillatoryDDE):
        if problem.m is None:
            stroboscopic_multiple(problem.tau, problem.omega)
        omega = problem.omega

        def rhs(t, x, delayed):
            return problem.f(x, delayed(1), omega * t)

        h0 = min(problem.tau, problem.period) / 50
        return _DelaySystem(problem.history, problem.tau, problem.dimension, ((0.0, rhs),), h0)
    regimes = tuple((start, fn) for start, fn in problem.regimes)
    return _DelaySystem(problem.history, problem.tau, problem.dimension, regimes, problem.tau / 50)


def integrate_dde(
    problem,
    t_end: float,
    tol: Tolerances = Tolerances(),
    *,
    breakpoints: Iterable[float] = (),
    first_step: float | None = None,
    max_steps: int = 5_000_000,
) -> DenseSolution:
    """Method-of-steps integration of an oscillatory or averaged constant-delay problem.

    ``problem`` is an :class:`~strobodde.core.OscillatoryDDE` (full forcing
    ``f(x, y, Omega t)``) or an :class:`~strobodde.averaging.AveragedDDE`.  On
    each step the delayed arguments come from the history or from the part of
    the solution already accepted; steps are capped at ``tau`` and cut at every
    multiple of ``tau`` and every regime switch.
    """
    if not t_end > 0:
        raise InvalidParameters(f"t_end must be positive, got {t_end}")
    sys = _delay_system(problem)
    tau, hist = sys.tau, sys.history
    starts = [s for s, _ in sys.regimes]
    bps = delay_breakpoints(tau, t_end, [*starts[1:], *breakpoints])
    cuts = [0.0, *bps, t_end]

    y0 = hist(0.0)
    b = _Builder(0.0, y0)
    lower = -tau * (1 + 1e-12)

    def delayed_factory(t):
        def delayed(j: int) -> np.ndarray:
            s = t - j * tau
            if s <= 0.0:
                if s < lower:
                    raise HistoryEvaluationOutOfRange(f"history needed at t={s}, below -tau")
                return hist(s)
            return b(s)

        return delayed

    start = time.perf_counter()
    h = first_step if first_step is not None else sys.first_step
    y = y0
    for a, c in zip(cuts[:-1], cuts[1:]):
        i = bisect.bisect_right(starts, a) - 1
        fn = sys.regimes[i][1]

        def rhs(t, x, fn=fn):
            return _real(fn(t, x, delayed_factory(t)))

        y, h = _advance(rhs, a, c, y, h, tol, tau, b, 1e-14 * t_end, max_steps)
    return _finish(b, bps, start, history=hist)


def _real(v) -> np.ndarray:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        if np.abs(v.imag).max(initial=0.0) > 1e-10 * (1.0 + np.abs(v.real).max(initial=0.0)):
            raise RealnessViolation(f"complex right-hand side {v}")
        return v.real.astype(float)
    return v.astype(float, copy=False)
