"""Nestable forward-mode dual numbers.

A :class:`Dual` carries a primal value and a tangent at a given nesting
``level``.  Primal and tangent may themselves be duals of a lower level, so
repeated directional derivatives (needed for word basis functions of several
letters) are obtained by wrapping an already-dual input once more.  Mixing
levels in one operation treats the lower-level operand as a constant of the
higher level, which avoids perturbation confusion.

Mode functions that should be differentiable this way must use the math
helpers of this module (:func:`sin`, :func:`exp`, ...) instead of :mod:`math`
or :mod:`numpy`; the helpers fall back to :mod:`math`/:mod:`cmath` on plain
numbers.
"""

from __future__ import annotations

import cmath
import itertools
import math
from typing import Any, Callable, Sequence

__all__ = [
    "Dual",
    "level_of",
    "primal",
    "tangent",
    "jvp",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "tanh",
]


def level_of(x: Any) -> int:
    return x.level if isinstance(x, Dual) else 0


class Dual:
    __slots__ = ("primal", "tangent", "level")

    def __init__(self, primal, tangent=0.0, level: int = 1):
        self.primal = primal
        self.tangent = tangent
        self.level = level

    def __repr__(self) -> str:
        return f"Dual({self.primal!r}, {self.tangent!r}, level={self.level})"

    # Split another operand into (primal, tangent) at this level.
    def _parts(self, other):
        if isinstance(other, Dual) and other.level == self.level:
            return other.primal, other.tangent
        return other, 0.0

    def __add__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__radd__(self)
        p, t = self._parts(other)
        return Dual(self.primal + p, self.tangent + t, self.level)

    def __radd__(self, other):
        p, t = self._parts(other)
        return Dual(p + self.primal, t + self.tangent, self.level)

    def __sub__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rsub__(self)
        p, t = self._parts(other)
        return Dual(self.primal - p, self.tangent - t, self.level)

    def __rsub__(self, other):
        p, t = self._parts(other)
        return Dual(p - self.primal, t - self.tangent, self.level)

    def __mul__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rmul__(self)
        p, t = self._parts(other)
        return Dual(self.primal * p, self.tangent * p + self.primal * t, self.level)

    def __rmul__(self, other):
        p, t = self._parts(other)
        return Dual(p * self.primal, t * self.primal + p * self.tangent, self.level)

    def __truediv__(self, other):
        if isinstance(other, Dual) and other.level > self.level:
            return other.__rtruediv__(self)
        p, t = self._parts(other)
        q = self.primal / p
        return Dual(q, (self.tangent - q * t) / p, self.level)

    def __rtruediv__(self, other):
        p, t = self._parts(other)
        q = p / self.primal
        return Dual(q, (t - q * self.tangent) / self.primal, self.level)

    def __pow__(self, other):
        if isinstance(other, Dual):
            if other.level > self.level:
                return other.__rpow__(self)
            if other.level == self.level:
                return exp(other * log(self))
        if other == 0:
            return Dual(self.primal**0, 0.0 * self.tangent, self.level)
        return Dual(
            self.primal**other,
            other * self.primal ** (other - 1) * self.tangent,
            self.level,
        )

    def __rpow__(self, other):
        # other ** self with other constant at this level
        value = other**self.primal
        return Dual(value, value * log(other) * self.tangent, self.level)

    def __neg__(self):
        return Dual(-self.primal, -self.tangent, self.level)

    def __pos__(self):
        return self

    def conjugate(self):
        return Dual(_conj(self.primal), _conj(self.tangent), self.level)


def _conj(x):
    return x.conjugate() if hasattr(x, "conjugate") else x


def primal(x: Any, level: int | None = None) -> Any:
    """Strip the dual parts down to (and excluding) ``level``; all of them by default."""
    while isinstance(x, Dual) and (level is None or x.level >= level):
        x = x.primal
    return x


def tangent(x: Any, level: int) -> Any:
    if isinstance(x, Dual) and x.level == level:
        return x.tangent
    return 0.0


def _lift(fn_real: Callable, fn_complex: Callable, deriv: Callable) -> Callable:
    def f(x):
        if isinstance(x, Dual):
            return Dual(f(x.primal), deriv(x.primal) * x.tangent, x.level)
        if isinstance(x, complex):
            return fn_complex(x)
        return fn_real(x)

    return f


def _real_or_complex(real_fn, complex_fn):
    def f(x):
        try:
            return real_fn(x)
        except ValueError:
            return complex_fn(x)

    return f


sin = _lift(math.sin, cmath.sin, lambda p: cos(p))
cos = _lift(math.cos, cmath.cos, lambda p: -sin(p))
exp = _lift(math.exp, cmath.exp, lambda p: exp(p))
log = _lift(_real_or_complex(math.log, cmath.log), cmath.log, lambda p: 1.0 / p)
sqrt = _lift(_real_or_complex(math.sqrt, cmath.sqrt), cmath.sqrt, lambda p: 0.5 / sqrt(p))
tanh = _lift(math.tanh, cmath.tanh, lambda p: 1.0 - tanh(p) ** 2)


_levels = itertools.count(1)


def jvp(fn: Callable[[Sequence], Sequence], x: Sequence, v: Sequence) -> list:
    """Directional derivative ``fn'(x) v`` by one extra dual level.

    Every call gets a fresh level above all levels created before it, so a
    perturbation captured by a closure (and invisible in ``x``) is never
    confused with the new one.
    """
    level = next(_levels)
    seeded = [Dual(a, b, level) for a, b in zip(x, v)]
    out = fn(seeded)
    return [tangent(o, level) for o in out]
