"""Acceptance criteria, each checked at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion, or directly with ``python tests/test_acceptance.py``.
"""

import math
from functools import lru_cache

import numpy as np
import pytest

from strobodde.averaging import averaged_order1, averaged_order2
from strobodde.config import default_config
from strobodde.core import stroboscopic_grid
from strobodde.harness import cmd_convergence, cmd_trajectory, cmd_verify
from strobodde.integrators import Tolerances, integrate_dde
from strobodde.segmentation import integrate_segmented, patch, segment
from strobodde.toggle import (
    equilibrium_params,
    preset,
    toggle_averaged2,
    toggle_averaged3,
    toggle_oscillatory,
)

# reference maximum errors in u on [0, 2] for Omega = 16 pi ... 512 pi
REFERENCE_ERRORS = {
    2: [3.31e-4, 8.83e-5, 2.28e-5, 5.77e-6, 1.46e-6, 3.66e-7],
    3: [1.04e-4, 1.28e-5, 1.59e-6, 1.96e-7, 2.07e-8, 2.30e-9],
}


def report(number, passed, detail):
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
    return passed


@lru_cache(maxsize=None)
def convergence():
    return cmd_convergence(default_config("convergence", orders="1, 2, 3"), write=False)


def criterion_1():
    s = convergence().slopes
    ok = -2.2 <= s[2] <= -1.8 and -3.3 <= s[3] <= -2.7
    return report(1, ok, f"slope order 2 = {s[2]:.3f} in [-2.2, -1.8], order 3 = {s[3]:.3f} in [-3.3, -2.7]")


def criterion_2():
    rows = convergence().rows
    worst, where = 1.0, ""
    for n, expected in REFERENCE_ERRORS.items():
        for r, ref in zip(rows, expected):
            ratio = max(r.errors[n] / ref, ref / r.errors[n])
            if ratio > worst:
                worst, where = ratio, f"order {n} at Omega = {r.omega / math.pi:.0f} pi"
    cells = " ".join(f"{r.errors[2]:.3g}/{r.errors[3]:.3g}" for r in rows)
    return report(2, worst <= 2.0 and len(rows) == 6, f"largest factor {worst:.3f} ({where}); order2/order3: {cells}")


def criterion_3():
    s = convergence().slopes[1]
    return report(3, -1.25 <= s <= -0.75, f"slope order 1 = {s:.3f} in [-1.25, -0.75]")


def criterion_4():
    p = toggle_oscillatory(preset("table1", Omega=16 * math.pi))
    tol = Tolerances(1e-8, 1e-10)
    X = patch(integrate_segmented(segment(p, 4), tol), p.tau)
    direct = integrate_dde(p, 2.0, tol)
    grid = stroboscopic_grid(p, 2.0).times
    err = float(np.max(np.abs(X.sample(grid) - direct.sample(grid))))
    return report(4, err <= 1e-6, f"max stroboscopic difference {err:.3e} <= 1e-6 ({len(grid)} times)")


def criterion_5():
    r = cmd_verify(default_config("verify"))
    failed = [c.name for c in r.checks if not c.passed]
    worst = {c.name: c.magnitude for c in r.checks}
    detail = (
        f"{len(r.checks)} checks, failed: {failed or 'none'}; "
        f"segmented identity {worst['first-interval field vs segmented average']:.1e}/"
        f"{worst['after-delay field vs segmented average']:.1e}, "
        f"closed form {worst['closed-form order-2 toggle vs generic order-2']:.1e}, "
        f"word basis {worst['word basis (dual) vs nested finite differences']:.1e}"
    )
    return report(5, r.passed, detail)


def criterion_6():
    r = cmd_trajectory(default_config("trajectory"), write=False)
    d2, d3 = r.discrepancy[2], r.discrepancy[3]
    s2, s3 = r.speedup(2), r.speedup(3)
    ok = d3 < d2 and d2 / d3 >= 2.0 and min(s2, s3) >= 10.0
    detail = (
        f"discrepancy order 2 = {d2:.3e}, order 3 = {d3:.3e} (ratio {d2 / d3:.1f} >= 2); "
        f"speedup vs reference {s2:.1f}x / {s3:.1f}x (>= 10); "
        f"vs oscillatory run at the averaged tolerance {r.speedup(2, 'oscillatory'):.1f}x / "
        f"{r.speedup(3, 'oscillatory'):.1f}x"
    )
    return report(6, ok, detail)


def criterion_7():
    tol = Tolerances(1e-8, 1e-10)
    worst = 0.0
    for name in ("table1", "fig2"):
        q = equilibrium_params(preset(name))
        p = toggle_oscillatory(q)
        systems = (p, averaged_order1(p), averaged_order2(p), toggle_averaged2(q), toggle_averaged3(q))
        for system in systems:
            sol = integrate_dde(system, 2.0, tol)
            dense = sol.sample(np.linspace(0.0, 2.0, 201))
            worst = max(worst, float(np.abs(dense[:, :2] - [q.u0, q.v0]).max()))
    return report(7, worst <= 1e-8, f"max deviation from equilibrium {worst:.3e} <= 1e-8")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    assert criterion()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    raise SystemExit(0 if all(results) else 1)
