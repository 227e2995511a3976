"""Stroboscopically averaged right-hand sides.

* :func:`word_basis` evaluates basis functions ``g_w`` of a non-delay mode set
  through the recursion ``g_{k1...kn} = g'_{k2...kn} g_{k1}``.
* :func:`averaged_order1` and :func:`averaged_order2` build averaged delay
  problems whose stroboscopic error is ``O(1/Omega)`` and ``O(1/Omega^2)``.
* :func:`averaged_order2_segmented` is the second-order average of a
  segmented (non-delay) system; patching its blocks must reproduce
  :func:`averaged_order2` exactly, which makes it an algebraic oracle.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .core import History, ODEModeSet, OscillatoryDDE, stroboscopic_multiple
from .dual import jvp as dual_jvp
from .errors import (
    DepthExceeded,
    InvalidParameters,
    MissingHistoryDerivative,
    UnrepresentedLetter,
)
from .integrators import DenseSolution, Tolerances, integrate_dde

__all__ = [
    "Word",
    "WordBasisEvaluator",
    "word_basis",
    "AveragedDDE",
    "averaged_order1",
    "averaged_order2",
    "order2_first_interval",
    "order2_after_delay",
    "averaged_order2_segmented",
    "integrate_averaged",
]


@dataclass(frozen=True)
class Word:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(k) for k in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.letters)) + ")" if self.letters else "()"


@dataclass(frozen=True)
class WordBasisEvaluator:
    """Evaluates ``g_w`` for a non-delay mode set.

    ``differentiation="dual"`` nests forward-mode dual numbers and supports any
    depth up to ``max_depth``; it needs mode functions written with
    :mod:`strobodde.dual` math.  ``"analytic"`` uses the stored mode
    derivatives and therefore stops at two letters.
    """

    modes: ODEModeSet
    differentiation: str = "dual"
    max_depth: int = 3

    def __post_init__(self):
        if self.differentiation not in ("dual", "analytic"):
            raise InvalidParameters(f"unknown differentiation mode {self.differentiation!r}")

    def __call__(self, w, xi) -> np.ndarray:
        letters = tuple(w)
        for k in letters:
            if k not in self.modes:
                raise UnrepresentedLetter(k)
        if len(letters) > self.max_depth:
            raise DepthExceeded(f"word of length {len(letters)} exceeds max depth {self.max_depth}")
        xi = np.asarray(xi)
        if not letters:
            return xi.astype(complex)
        if self.differentiation == "analytic":
            if len(letters) > 2:
                raise DepthExceeded("analytic Jacobians only provide words of length <= 2")
            g1 = self.modes.value(letters[0], xi)
            if len(letters) == 1:
                return g1
            return self.modes.jvp(letters[1], xi, g1)
        return np.asarray(self._dual(letters, xi.tolist()), dtype=complex)

    def _dual(self, letters, xi):
        g1 = self.modes.entries[letters[0]].value(xi)
        if len(letters) == 1:
            return list(g1)
        return dual_jvp(lambda z: self._dual(letters[1:], z), xi, list(g1))


def word_basis(w, evaluator: WordBasisEvaluator, xi) -> np.ndarray:
    """``g_w(xi)``: identity for the empty word, the mode itself for one letter."""
    return evaluator(w, xi)


# rhs(t, x, delayed) where delayed(j) returns X(t - j tau)
RegimeRhs = Callable[[float, np.ndarray, Callable[[int], np.ndarray]], np.ndarray]


@dataclass(frozen=True)
class AveragedDDE:
    """Averaged delay problem with one right-hand side per time regime.

    ``regimes[i] = (start_i, rhs_i)`` applies on ``[start_i, start_{i+1})``;
    the last one is used for all later times.
    """

    order: int
    regimes: tuple
    history: History
    omega: float
    dimension: int
    n_lags: int = 1

    def __post_init__(self):
        starts = [s for s, _ in self.regimes]
        if not starts or starts[0] != 0.0 or starts != sorted(starts):
            raise InvalidParameters(f"regime starts must begin at 0 and increase: {starts}")

    @property
    def tau(self) -> float:
        return self.history.tau

    def regime_index(self, t: float) -> int:
        return bisect.bisect_right([s for s, _ in self.regimes], t) - 1

    def rhs(self, t: float, x, delayed) -> np.ndarray:
        return np.asarray(self.regimes[self.regime_index(t)][1](t, x, delayed))


def _check(p: OscillatoryDDE) -> None:
    if p.m is None:
        stroboscopic_multiple(p.tau, p.omega)


def averaged_order1(p: OscillatoryDDE) -> AveragedDDE:
    """``X'(t) = f_0(X(t), X(t - tau))`` with the original history."""
    _check(p)
    modes = p.modes

    def rhs(t, x, delayed):
        return modes.value(0, x, delayed(1))

    return AveragedDDE(1, ((0.0, rhs),), p.history, p.omega, p.dimension, 1)


def _local_terms(p: OscillatoryDDE, x, y) -> np.ndarray:
    """``f_0`` plus the three sums that only involve ``(X(t), X(t - tau))``."""
    m, omega = p.modes, p.omega
    f0 = m.value(0, x, y)
    dxf0 = m.dx(0, x, y)
    out = f0.copy()
    for k in m.nonzero:
        c = 1j / (k * omega)
        dxfk = m.dx(k, x, y)
        out += c * (dxf0 @ m.value(k, x, y) - dxfk @ f0 + dxfk @ m.value(-k, x, y))
    return out


def order2_first_interval(p: OscillatoryDDE, t: float, x, y) -> np.ndarray:
    """Second-order averaged field for ``0 <= t < tau``; ``y = X(t - tau)`` is history."""
    if p.history.derivative is None:
        raise MissingHistoryDerivative("second-order averaging needs the history derivative")
    m = p.modes
    out = _local_terms(p, x, y)
    rate = p.history.rate(t - p.tau)
    for k in m.nonzero:
        out -= 1j / (k * p.omega) * (m.dy(k, x, y) @ rate)
    return out


def order2_after_delay(p: OscillatoryDDE, x, y, z) -> np.ndarray:
    """Second-order averaged field for ``t >= tau``; ``y, z = X(t - tau), X(t - 2 tau)``."""
    m = p.modes
    out = _local_terms(p, x, y)
    dyf0 = m.dy(0, x, y)
    f0_lag = m.value(0, y, z)
    for k in m.nonzero:
        c = 1j / (k * p.omega)
        dyfk = m.dy(k, x, y)
        out += c * (dyf0 @ m.value(k, y, z) - dyfk @ f0_lag + dyfk @ m.value(-k, y, z))
    return out


def averaged_order2(p: OscillatoryDDE) -> AveragedDDE:
    """Two-regime second-order averaged problem (switch at ``t = tau``)."""
    _check(p)
    if p.history.derivative is None:
        raise MissingHistoryDerivative("second-order averaging needs the history derivative")

    def first(t, x, delayed):
        return order2_first_interval(p, t, x, delayed(1))

    def later(t, x, delayed):
        return order2_after_delay(p, x, delayed(1), delayed(2))

    regimes = ((0.0, first), (p.tau, later))
    return AveragedDDE(2, regimes, p.history, p.omega, p.dimension, 2)


def averaged_order2_segmented(s, differentiation: str = "block") -> Callable[[np.ndarray], np.ndarray]:
    """Second-order averaged field of a segmented system, as a function of ``xi``.

    ``g_0 + sum_{k != 0} i/(k Omega) (g_0' g_k - g_k' g_0 + g_k' g_{-k})``.
    With ``differentiation="block"`` the Jacobian-vector products are
    assembled block by block from the stored mode Jacobians; ``"dual"``
    differentiates the big mode functions with dual numbers instead, which
    makes the result independent of the stored Jacobians.
    """
    modes: ODEModeSet = s.big_modes
    omega = s.problem.omega
    nonzero = [k for k in modes.letters if k != 0]
    if differentiation == "block":
        jvp = modes.jvp
    elif differentiation == "dual":

        def jvp(k, xi, v):
            if k not in modes:
                return np.zeros(modes.dimension, dtype=complex)
            return np.asarray(dual_jvp(modes.entries[k].value, list(xi), list(v)), dtype=complex)

    else:
        raise InvalidParameters(f"unknown differentiation mode {differentiation!r}")

    def rhs(xi) -> np.ndarray:
        xi = np.asarray(xi)
        g0 = modes.value(0, xi)
        out = g0.copy()
        for k in nonzero:
            gk = modes.value(k, xi)
            corr = jvp(0, xi, gk) - jvp(k, xi, g0) + jvp(k, xi, modes.value(-k, xi))
            out += 1j / (k * omega) * corr
        return out

    return rhs


def integrate_averaged(
    a: AveragedDDE,
    t_end: float,
    tol: Tolerances = Tolerances(),
    *,
    breakpoints: Iterable[float] = (),
) -> DenseSolution:
    """Method of steps for an averaged problem; regime switches are breakpoints."""
    return integrate_dde(a, t_end, tol, breakpoints=breakpoints)
