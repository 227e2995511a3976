"""Numerical studies on the toggle switch: convergence, trajectories, identities."""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .averaging import (
    WordBasisEvaluator,
    averaged_order1,
    averaged_order2,
    averaged_order2_segmented,
    order2_after_delay,
    order2_first_interval,
)
from .config import RunConfig
from .core import OscillatoryDDE, stroboscopic_grid
from .errors import AveragingError
from .integrators import Tolerances, integrate_dde
from .segmentation import integrate_segmented, patch, segment
from .toggle import (
    ToggleParams,
    toggle_averaged2,
    toggle_averaged3,
    toggle_oscillatory,
)

__all__ = [
    "ConvergenceRow",
    "ConvergenceReport",
    "cmd_convergence",
    "TrajectoryReport",
    "cmd_trajectory",
    "Check",
    "VerifyReport",
    "cmd_verify",
    "fd_word_basis",
    "fit_slope",
]

log = logging.getLogger(__name__)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _max_workers() -> int:
    try:
        return max(1, int(os.environ.get("AVG_THREADS", "1")))
    except ValueError:
        return 1


def averaged_system(params: ToggleParams, order: int):
    if order == 1:
        return averaged_order1(toggle_oscillatory(params))
    if order == 2:
        return toggle_averaged2(params)
    if order == 3:
        return toggle_averaged3(params)
    raise ValueError(f"no averaged toggle system of order {order}")


def fit_slope(omegas, errors) -> float:
    """Least-squares slope of log(error) against log(Omega); NaN below 3 points."""
    if len(omegas) < 3:
        return math.nan
    return float(np.polyfit(np.log(omegas), np.log(errors), 1)[0])


# --------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ConvergenceRow:
    omega: float
    errors: dict
    reference_u_end: float
    wall_times: dict


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple
    slopes: dict
    orders: tuple
    tol: Tolerances
    reference_tol: Tolerances

    @property
    def columns(self) -> tuple:
        # orders 2 and 3 keep their fixed leading positions; extra orders follow
        return tuple(n for n in (2, 3) if n in self.orders) + tuple(
            n for n in self.orders if n not in (2, 3)
        )

    def csv_text(self) -> str:
        lines = ["omega," + ",".join(f"err_order{n}" for n in self.columns)]
        for r in self.rows:
            lines.append(",".join([_fmt(r.omega)] + [_fmt(r.errors[n]) for n in self.columns]))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        parts = [f"slope_order{n}={self.slopes[n]:.4f}" for n in self.orders]
        return (
            " ".join(parts)
            + f" (tol rel={self.tol.rel:g} abs={self.tol.abs:g};"
            + f" reference rel={self.reference_tol.rel:g} abs={self.reference_tol.abs:g})"
        )


def convergence_row(
    params: ToggleParams,
    omega: float,
    t_end: float,
    tol: Tolerances,
    reference_tol: Tolerances,
    orders=(2, 3),
) -> ConvergenceRow:
    """Max stroboscopic error in u of each averaged order at one Omega."""
    q = params.with_omega(omega)
    osc = toggle_oscillatory(q)
    grid = stroboscopic_grid(osc, t_end).times
    ref = integrate_dde(osc, t_end, reference_tol)
    u_ref = ref.sample(grid)[:, 0]
    errors, walls = {}, {"reference": ref.stats.wall_time}
    for n in orders:
        sol = integrate_dde(averaged_system(q, n), t_end, tol)
        errors[n] = float(np.max(np.abs(u_ref - sol.sample(grid)[:, 0])))
        walls[n] = sol.stats.wall_time
    return ConvergenceRow(omega, errors, float(ref(t_end)[0]), walls)


def _row_job(args):
    return convergence_row(*args)


def cmd_convergence(cfg: RunConfig, *, write: bool = True) -> ConvergenceReport:
    jobs = [
        (cfg.params, w, cfg.t_end, cfg.tol, cfg.reference_tol, cfg.orders)
        for w in sorted(cfg.omegas)
    ]
    workers = min(_max_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_job, jobs))
    else:
        rows = [_row_job(j) for j in jobs]
    rows.sort(key=lambda r: r.omega)
    omegas = [r.omega for r in rows]
    slopes = {n: fit_slope(omegas, [r.errors[n] for r in rows]) for n in cfg.orders}
    report = ConvergenceReport(tuple(rows), slopes, cfg.orders, cfg.tol, cfg.reference_tol)
    if write:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "convergence.csv").write_text(report.csv_text())
    return report


# --------------------------------------------------------------------------
# trajectory study


@dataclass(frozen=True)
class TrajectoryReport:
    discrepancy: dict  # order -> max stroboscopic |u - U|
    wall_times: dict  # run name -> seconds
    fast_amplitude: dict  # component -> max |x - X3| on a fine grid
    n_steps: dict

    def speedup(self, order: int, against: str = "reference") -> float:
        return self.wall_times[against] / self.wall_times[f"order{order}"]

    def timing_text(self) -> str:
        lines = [f"{k} {_fmt(v)}" for k, v in self.wall_times.items()]
        for n in (2, 3):
            lines.append(f"speedup_order{n}_vs_reference {self.speedup(n):.2f}")
            lines.append(f"speedup_order{n}_vs_same_tolerance {self.speedup(n, 'oscillatory'):.2f}")
        return "\n".join(lines) + "\n"


def _write_txv(path: Path, times, states) -> None:
    lines = ["t,u,v"]
    for t, x in zip(times, states):
        lines.append(f"{_fmt(t)},{_fmt(x[0])},{_fmt(x[1])}")
    path.write_text("\n".join(lines) + "\n")


def cmd_trajectory(cfg: RunConfig, *, write: bool = True) -> TrajectoryReport:
    """Oscillatory reference vs second- and third-order averaging over ``[0, t_end]``.

    Wall times cover the integration call only.  The reference runs at the
    reference tolerance; an extra oscillatory run at the tolerance of the
    averaged runs gives the like-for-like speedup.
    """
    q = cfg.params.with_omega(cfg.omegas[0])
    osc = toggle_oscillatory(q)
    ref = integrate_dde(osc, cfg.t_end, cfg.reference_tol)
    same = integrate_dde(osc, cfg.t_end, cfg.tol)
    avg = {n: integrate_dde(averaged_system(q, n), cfg.t_end, cfg.tol) for n in (2, 3)}

    grid = stroboscopic_grid(osc, cfg.t_end).times
    true_strobe = ref.sample(grid)
    discrepancy = {
        n: float(np.max(np.abs(true_strobe[:, 0] - sol.sample(grid)[:, 0])))
        for n, sol in avg.items()
    }
    fine = np.linspace(0.0, cfg.t_end, int(40 * cfg.t_end / osc.period) + 1)
    diff = np.abs(ref.sample(fine) - avg[3].sample(fine))
    fast = {"u": float(diff[:, 0].max()), "v": float(diff[:, 1].max())}
    walls = {
        "reference": ref.stats.wall_time,
        "oscillatory": same.stats.wall_time,
        "order2": avg[2].stats.wall_time,
        "order3": avg[3].stats.wall_time,
    }
    steps = {
        "reference": ref.stats.n_steps,
        "oscillatory": same.stats.n_steps,
        "order2": avg[2].stats.n_steps,
        "order3": avg[3].stats.n_steps,
    }
    report = TrajectoryReport(discrepancy, walls, fast, steps)
    if write:
        cfg.out.mkdir(parents=True, exist_ok=True)
        _write_txv(cfg.out / "trajectory_true.csv", grid, true_strobe)
        dense = np.linspace(0.0, cfg.t_end, cfg.samples)
        for n, sol in avg.items():
            _write_txv(cfg.out / f"trajectory_avg{n}.csv", dense, sol.sample(dense))
        (cfg.out / "timing.txt").write_text(report.timing_text())
    return report


# --------------------------------------------------------------------------
# identity checks


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    magnitude: float
    tolerance: float
    location: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        where = f" at {self.location}" if self.location else ""
        return f"{status} {self.name}: {self.magnitude:.3e} (tol {self.tolerance:.1e}){where}"


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        return "\n".join(c.line() for c in self.checks) + "\n"


def _rel(a, b, floor: float = 1e-300) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), floor))


def _worst(name, tol, items) -> Check:
    """``items``: iterable of (error, location)."""
    err, where = max(items, key=lambda it: it[0])
    return Check(name, bool(err <= tol), err, tol, where)


def _random_state(p: OscillatoryDDE, rng, spread=0.3) -> np.ndarray:
    base = p.history(0.0)
    return base + spread * (1.0 + np.abs(base)) * rng.standard_normal(base.size)


def check_segmentation_roundtrip(p: OscillatoryDDE, L: int, tol: Tolerances, bound: float) -> Check:
    """Patched segmented solution vs direct method of steps at stroboscopic times."""
    s = segment(p, L)
    patched = patch(integrate_segmented(s, tol), p.tau)
    direct = integrate_dde(p, L * p.tau, tol)
    grid = stroboscopic_grid(p, L * p.tau).times
    errs = [(float(np.max(np.abs(patched(t) - direct(t)))), f"t={t:.6g}") for t in grid]
    return _worst(f"segmentation round trip L={L}", bound, errs)


def check_order2_identity(p: OscillatoryDDE, rng, n: int = 20, tol: float = 1e-12) -> list[Check]:
    """Both second-order regimes against the averaged segmented system (L = 2)."""
    s = segment(p, 2)
    lay = s.layout
    oracle = averaged_order2_segmented(s, "dual")
    block = averaged_order2_segmented(s, "block")
    first, later, clock, agree = [], [], [], []
    for i in range(n):
        that = rng.uniform(0.0, p.tau)
        xs = [_random_state(p, rng) for _ in range(3)]
        xi = lay.pack(that, xs)
        big = oracle(xi)
        first.append((_rel(order2_first_interval(p, that, xs[1], xs[0]), big[lay.block(1)]), f"sample {i}"))
        later.append((_rel(order2_after_delay(p, xs[2], xs[1], xs[0]), big[lay.block(2)]), f"sample {i}"))
        head = np.concatenate([[1.0], p.history.rate(that - p.tau)])
        clock.append((_rel(big[: 1 + lay.D], head, 1.0), f"sample {i}"))
        agree.append((_rel(block(xi), big), f"sample {i}"))
    return [
        _worst("first-interval field vs segmented average", tol, first),
        _worst("after-delay field vs segmented average", tol, later),
        _worst("clock and history rows unchanged by averaging", tol, clock),
        _worst("block Jacobian products vs dual products", tol, agree),
    ]


def check_toggle_closed_form(params: ToggleParams, rng, n: int = 20, tol: float = 1e-12) -> Check:
    """Closed-form second-order toggle system vs the generic construction."""
    osc = toggle_oscillatory(params)
    generic = averaged_order2(osc)
    closed = toggle_averaged2(params)
    errs = []
    for i in range(n):
        t = rng.uniform(0.0, 3 * params.tau)
        x, y, z = (_random_state(osc, rng) for _ in range(3))
        lags = {1: y, 2: z}
        delayed = lags.__getitem__
        a = closed.rhs(t, x, delayed)
        b = generic.rhs(t, x, delayed)
        errs.append((_rel(a, b), f"t={t:.4g}"))
    return _worst("closed-form order-2 toggle vs generic order-2", tol, errs)


def fd_word_basis(modes, letters, xi, delta: float | None = None) -> np.ndarray:
    """Word basis function by nested central differences along ``g_{k1}``."""
    xi = np.asarray(xi, dtype=complex)
    if not letters:
        return xi
    g1 = modes.value(letters[0], xi)
    if len(letters) == 1:
        return g1
    size = np.linalg.norm(g1)
    if size == 0.0:
        return np.zeros_like(xi)
    if delta is None:
        delta = 1e-5 if len(letters) == 2 else 1e-4
    h = delta * (1.0 + np.linalg.norm(xi)) / size
    rest = letters[1:]
    return (fd_word_basis(modes, rest, xi + h * g1, delta) - fd_word_basis(modes, rest, xi - h * g1, delta)) / (2 * h)


def check_word_basis(p: OscillatoryDDE, rng, letters=(-1, 0, 1), max_len: int = 3,
                     n_states: int = 5, tol: float = 1e-4) -> Check:
    s = segment(p, 2)
    ev = WordBasisEvaluator(s.big_modes, "dual", max_len)
    errs = []
    for i in range(n_states):
        xi = s.layout.pack(rng.uniform(0, p.tau), [_random_state(p, rng) for _ in range(3)])
        for n in range(max_len + 1):
            for w in itertools.product(letters, repeat=n):
                d = ev(w, xi)
                f = fd_word_basis(s.big_modes, w, xi)
                errs.append((_rel(d, f, 1e-6), f"word {w}, state {i}"))
    return _worst("word basis (dual) vs nested finite differences", tol, errs)


def check_realness(p: OscillatoryDDE, rng, n: int = 20, tol: float = 1e-12) -> Check:
    errs = []
    for i in range(n):
        t = rng.uniform(0.0, p.tau)
        x, y, z = (_random_state(p, rng) for _ in range(3))
        for name, v in (
            ("first", order2_first_interval(p, t, x, y)),
            ("after", order2_after_delay(p, x, y, z)),
        ):
            errs.append((float(np.linalg.norm(v.imag) / max(np.linalg.norm(v.real), 1e-300)), f"{name} {i}"))
    return _worst("second-order fields real for real states", tol, errs)


def check_mode_jacobians(p: OscillatoryDDE, rng, n: int = 10, tol: float = 1e-5) -> Check:
    errs = []
    for i in range(n):
        x, y = _random_state(p, rng), _random_state(p, rng)
        errs.append((p.modes.jacobian_error(x, y), f"state {i}"))
    return _worst("mode Jacobians vs finite differences", tol, errs)


def cmd_verify(cfg: RunConfig, problem: OscillatoryDDE | None = None) -> VerifyReport:
    """Run the identity suite; ``problem`` replaces the toggle system when given."""
    params = cfg.params.with_omega(cfg.omegas[0])
    p = problem if problem is not None else toggle_oscillatory(params)
    rng = np.random.default_rng(cfg.seed)
    checks: list[Check] = []

    def run(fn, *args, **kw):
        try:
            out = fn(*args, **kw)
        except AveragingError as exc:
            out = Check(fn.__name__, False, math.inf, 0.0, f"{type(exc).__name__}: {exc}")
        checks.extend(out if isinstance(out, list) else [out])

    run(check_mode_jacobians, p, rng)
    run(check_order2_identity, p, rng)
    run(check_realness, p, rng)
    run(check_word_basis, p, rng)
    if problem is None:
        run(check_toggle_closed_form, params, rng)
    for L in cfg.segments:
        run(check_segmentation_roundtrip, p, L, cfg.tol, 20 * cfg.tol.rel)
    return VerifyReport(tuple(checks))
