"""Problem descriptions shared by all modules.

A periodically forced constant-delay system

    x'(t) = f(x(t), x(t - tau), Omega t),   x(t) = phi(t) on [-tau, 0],

is described by its Fourier modes ``f_k(x, y)`` (a :class:`ModeSet`), the
initial :class:`History` and the fast angular frequency.  Everything in this
module is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyModeSet,
    InvalidParameters,
    MissingHistoryDerivative,
    NonStroboscopic,
)

__all__ = [
    "Mode",
    "ModeSet",
    "ODEMode",
    "ODEModeSet",
    "History",
    "constant_history",
    "OscillatoryDDE",
    "StroboscopicGrid",
    "validate_problem",
    "stroboscopic_grid",
    "stroboscopic_multiple",
]

VectorFn = Callable[[Sequence, Sequence], Sequence]
MatrixFn = Callable[[Sequence, Sequence], "np.ndarray"]

STROBOSCOPIC_RTOL = 1e-12


def _fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    """Central finite-difference Jacobian, step 1e-6 (1 + |x_j|)."""
    cols = []
    for j in range(x.size):
        h = 1e-6 * (1.0 + abs(x[j]))
        e = np.zeros(x.size)
        e[j] = h
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h))
    return np.column_stack(cols)


def _rel_err(a: np.ndarray, b: np.ndarray, scale: float) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), scale))


@dataclass(frozen=True)
class Mode:
    """One Fourier coefficient ``f_k(x, y)`` with its partial Jacobians.

    ``value`` receives plain sequences (possibly holding :class:`~strobodde.dual.Dual`
    entries) and returns a sequence of length D.  ``dx``/``dy`` return D x D
    arrays.
    """

    value: VectorFn
    dx: MatrixFn
    dy: MatrixFn


@dataclass(frozen=True)
class ModeSet:
    entries: Mapping[int, Mode]
    dimension: int
    real: bool = True  # f_{-k} = conj(f_k) for real arguments

    def __post_init__(self):
        if not self.entries:
            raise EmptyModeSet("a mode set needs at least the k = 0 mode")
        if 0 not in self.entries:
            raise InvalidParameters("mode 0 must be present")
        if self.dimension < 1:
            raise DimensionMismatch(f"dimension must be positive, got {self.dimension}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))

    @property
    def nonzero(self) -> tuple[int, ...]:
        return tuple(k for k in self.letters if k != 0)

    def __contains__(self, k: int) -> bool:
        return k in self.entries

    def value(self, k: int, x, y) -> np.ndarray:
        """``f_k(x, y)`` as a complex vector; zero for unrepresented ``k``."""
        if k not in self.entries:
            return np.zeros(self.dimension, dtype=complex)
        return np.asarray(self.entries[k].value(x, y), dtype=complex)

    def dx(self, k: int, x, y) -> np.ndarray:
        if k not in self.entries:
            return np.zeros((self.dimension, self.dimension), dtype=complex)
        return np.asarray(self.entries[k].dx(x, y), dtype=complex)

    def dy(self, k: int, x, y) -> np.ndarray:
        if k not in self.entries:
            return np.zeros((self.dimension, self.dimension), dtype=complex)
        return np.asarray(self.entries[k].dy(x, y), dtype=complex)

    def forcing(self, x, y, theta: float) -> np.ndarray:
        """Reconstruct ``sum_k exp(i k theta) f_k(x, y)`` (complex)."""
        out = np.zeros(self.dimension, dtype=complex)
        for k in self.letters:
            out += np.exp(1j * k * theta) * self.value(k, x, y)
        return out

    def jacobian_error(self, x, y) -> float:
        """Largest relative mismatch between stored and finite-difference Jacobians."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        worst = 0.0
        for k in self.letters:
            fx = _fd_jacobian(lambda s: self.value(k, s, y), x)
            fy = _fd_jacobian(lambda s: self.value(k, x, s), y)
            scale = 1e-3 * (1.0 + np.linalg.norm(self.value(k, x, y)))
            worst = max(worst, _rel_err(self.dx(k, x, y), fx, scale))
            worst = max(worst, _rel_err(self.dy(k, x, y), fy, scale))
        return worst

    def symmetry_error(self, x, y) -> float:
        """Largest ``|f_{-k} - conj(f_k)|`` relative to ``|f_k|`` over represented modes."""
        worst = 0.0
        for k in self.letters:
            a = self.value(k, x, y)
            b = self.value(-k, x, y)
            worst = max(worst, float(np.linalg.norm(b - a.conj()) / max(np.linalg.norm(a), 1.0)))
        return worst


@dataclass(frozen=True)
class ODEMode:
    """Fourier coefficient ``g_k(xi)`` of a non-delay oscillatory field."""

    value: Callable[[Sequence], Sequence]
    jacobian: Callable[[Sequence], "np.ndarray"] | None = None
    jvp: Callable[[Sequence, Sequence], "np.ndarray"] | None = None


@dataclass(frozen=True)
class ODEModeSet:
    """Modes ``g_k`` of ``xi' = g(xi, Omega t)`` (no delay)."""

    entries: Mapping[int, ODEMode]
    dimension: int
    real: bool = True

    def __post_init__(self):
        if not self.entries:
            raise EmptyModeSet("a mode set needs at least the k = 0 mode")
        if 0 not in self.entries:
            raise InvalidParameters("mode 0 must be present")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))

    def __contains__(self, k: int) -> bool:
        return k in self.entries

    def value(self, k: int, xi) -> np.ndarray:
        if k not in self.entries:
            return np.zeros(self.dimension, dtype=complex)
        return np.asarray(self.entries[k].value(xi), dtype=complex)

    def jvp(self, k: int, xi, v) -> np.ndarray:
        """``g_k'(xi) v`` from the analytic derivative information."""
        if k not in self.entries:
            return np.zeros(self.dimension, dtype=complex)
        mode = self.entries[k]
        if mode.jvp is not None:
            return np.asarray(mode.jvp(xi, v), dtype=complex)
        if mode.jacobian is None:
            raise InvalidParameters(f"mode {k} has no analytic derivative")
        return np.asarray(mode.jacobian(xi), dtype=complex) @ np.asarray(v, dtype=complex)


@dataclass(frozen=True)
class History:
    """Initial function ``phi`` on ``[-tau, 0]`` and its derivative."""

    value: Callable[[float], Sequence]
    tau: float
    derivative: Callable[[float], Sequence] | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidParameters(f"delay must be positive, got {self.tau}")

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.value(t), dtype=float)

    def rate(self, t: float) -> np.ndarray:
        if self.derivative is None:
            raise MissingHistoryDerivative("history has no derivative")
        return np.asarray(self.derivative(t), dtype=float)

    def derivative_error(self, n: int = 9) -> float:
        """Relative mismatch of ``derivative`` against central differences of ``value``."""
        worst = 0.0
        for s in np.linspace(-self.tau, 0.0, n + 2)[1:-1]:
            h = 1e-5 * self.tau
            fd = (self(s + h) - self(s - h)) / (2 * h)
            worst = max(worst, _rel_err(self.rate(s), fd, 1.0))
        return worst


def constant_history(values: Sequence[float], tau: float) -> History:
    vals = tuple(float(v) for v in values)
    zeros = (0.0,) * len(vals)
    return History(value=lambda t: vals, tau=tau, derivative=lambda t: zeros)


def stroboscopic_multiple(tau: float, omega: float) -> int:
    """The integer ``m = tau Omega / 2 pi``; raise :class:`NonStroboscopic` otherwise."""
    ratio = tau * omega / (2 * math.pi)
    m = round(ratio)
    if m < 1 or abs(ratio - m) > STROBOSCOPIC_RTOL * max(ratio, 1.0):
        raise NonStroboscopic(
            f"tau*Omega/(2 pi) = {ratio!r} is not a positive integer "
            f"(tau={tau!r}, Omega={omega!r})"
        )
    return m


@dataclass(frozen=True)
class OscillatoryDDE:
    modes: ModeSet
    history: History
    omega: float
    slow_time_index: int | None = None
    # Optional direct real evaluation of f(x, y, theta); used for speed when given.
    rhs: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = field(
        default=None, compare=False
    )
    m: int | None = None

    @property
    def tau(self) -> float:
        return self.history.tau

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def dimension(self) -> int:
        return self.modes.dimension

    def f(self, x, y, theta: float) -> np.ndarray:
        """Full right-hand side ``f(x, y, theta)``, real for real systems."""
        if self.rhs is not None:
            return np.asarray(self.rhs(x, y, theta), dtype=float)
        out = self.modes.forcing(x, y, theta)
        return out.real if self.modes.real else out


def _sample_states(p: OscillatoryDDE, n: int, rng: np.random.Generator):
    base_x = p.history(0.0)
    base_y = p.history(-p.tau)
    for _ in range(n):
        x = base_x + 0.1 * (1.0 + np.abs(base_x)) * rng.standard_normal(base_x.size)
        y = base_y + 0.1 * (1.0 + np.abs(base_y)) * rng.standard_normal(base_y.size)
        yield x, y


def validate_problem(
    p: OscillatoryDDE, *, check_invariants: bool = True, n_samples: int = 10, seed: int = 0
) -> OscillatoryDDE:
    """Check the standing hypothesis and the mode/history invariants.

    Returns a copy of ``p`` with ``m = tau Omega / 2 pi`` recorded.  The
    Jacobian and derivative self-checks are run at ``n_samples`` states drawn
    around the history.
    """
    if not p.omega > 0:
        raise InvalidParameters(f"Omega must be positive, got {p.omega}")
    m = stroboscopic_multiple(p.tau, p.omega)

    D = p.modes.dimension
    for s in (0.0, -p.tau):
        if p.history(s).shape != (D,):
            raise DimensionMismatch(
                f"history has shape {p.history(s).shape}, mode set dimension is {D}"
            )
    if p.slow_time_index is not None and not 0 <= p.slow_time_index < D:
        raise DimensionMismatch(f"slow_time_index {p.slow_time_index} outside 0..{D - 1}")

    if check_invariants:
        rng = np.random.default_rng(seed)
        for x, y in _sample_states(p, n_samples, rng):
            for k in p.modes.letters:
                if p.modes.value(k, x, y).shape != (D,):
                    raise DimensionMismatch(f"mode {k} does not return a {D}-vector")
            err = p.modes.jacobian_error(x, y)
            if err > 1e-5:
                raise InvalidParameters(f"mode Jacobians disagree with finite differences ({err:.2e})")
            if p.modes.real:
                err = p.modes.symmetry_error(x, y)
                if err > 1e-12:
                    raise InvalidParameters(f"modes are not conjugate symmetric ({err:.2e})")
        if p.history.derivative is not None:
            err = p.history.derivative_error()
            if err > 1e-6:
                raise InvalidParameters(f"history derivative disagrees with value ({err:.2e})")
    return replace(p, m=m)


@dataclass(frozen=True)
class StroboscopicGrid:
    period: float
    times: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


def stroboscopic_grid(p: OscillatoryDDE | float, t_end: float) -> StroboscopicGrid:
    """All stroboscopic times ``j T <= t_end``; ``p`` may be a problem or ``Omega`` itself."""
    if not t_end > 0:
        raise InvalidParameters(f"t_end must be positive, got {t_end}")
    omega = p.omega if hasattr(p, "omega") else float(p)
    T = 2 * math.pi / omega
    n = math.floor(t_end / T * (1 + 1e-12) + 1e-12)
    return StroboscopicGrid(period=T, times=np.arange(n + 1) * T)
