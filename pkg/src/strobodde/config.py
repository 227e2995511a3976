"""Flat ``key = value`` run configuration.

One setting per line, ``#`` starts a comment.  Fast frequencies are given as
multiples of pi (``omega_over_pi = 16, 32, 64``) so that 16 pi is entered
exactly.  Recognised keys::

    preset           table1 | fig2
    alpha beta A omega_slow B tau u0 v0      override preset values
    allow_small_beta true | false
    omega_over_pi    one value or a comma-separated list
    t_end            length of the study interval
    rtol atol        tolerances of the averaged (and tested) runs
    reference_factor reference runs use tolerances times this factor
    orders           averaging orders studied by ``convergence`` (e.g. 1, 2, 3)
    segments         L values checked by ``verify``
    samples          number of dense output rows in ``trajectory``
    seed             random seed for state sampling
    out              output directory
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .core import stroboscopic_multiple
from .errors import AveragingError, ConfigError, NonStroboscopic
from .integrators import Tolerances
from .toggle import PRESETS, ToggleParams, preset

__all__ = ["RunConfig", "parse_config", "load_config", "default_config"]

_PARAM_KEYS = {"alpha", "beta", "A", "omega_slow", "B", "tau", "u0", "v0"}
_KEYS = _PARAM_KEYS | {
    "preset",
    "allow_small_beta",
    "omega_over_pi",
    "t_end",
    "rtol",
    "atol",
    "reference_factor",
    "orders",
    "segments",
    "samples",
    "seed",
    "out",
}


@dataclass(frozen=True)
class RunConfig:
    params: ToggleParams
    omegas: tuple[float, ...]
    t_end: float
    tol: Tolerances
    reference_factor: float = 0.01
    orders: tuple[int, ...] = (2, 3)
    segments: tuple[int, ...] = (1, 2, 4)
    samples: int = 2001
    seed: int = 0
    out: Path = Path(".")

    def __post_init__(self):
        if not self.omegas:
            raise ConfigError("at least one Omega is required")
        for omega in self.omegas:
            stroboscopic_multiple(self.params.tau, omega)
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.reference_factor <= 1:
            raise ConfigError("reference_factor must lie in (0, 1]")
        if any(n not in (1, 2, 3) for n in self.orders):
            raise ConfigError(f"orders must be among 1, 2, 3: {self.orders}")

    @property
    def reference_tol(self) -> Tolerances:
        return self.tol.scaled(self.reference_factor)


_DEFAULTS = {
    "convergence": dict(
        preset="table1",
        omega_over_pi="16, 32, 64, 128, 256, 512",
        t_end="2",
        rtol="1e-10",
        atol="1e-12",
    ),
    "trajectory": dict(preset="fig2", t_end="100", rtol="1e-8", atol="1e-10"),
    "verify": dict(preset="table1", omega_over_pi="16", t_end="2", rtol="1e-8", atol="1e-10"),
}


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict of raw strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.replace(",", " ").split()]


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def default_config(command: str, **raw: str) -> RunConfig:
    return build_config(command, {k: str(v) for k, v in raw.items()})


def build_config(command: str, raw: dict[str, str]) -> RunConfig:
    if command not in _DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    settings = {**_DEFAULTS[command], **raw}
    try:
        name = settings["preset"]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        overrides = {k: float(settings[k]) for k in _PARAM_KEYS if k in settings}
        if "allow_small_beta" in settings:
            overrides["allow_small_beta"] = _bool(settings["allow_small_beta"])
        if "omega_over_pi" in settings:
            omegas = tuple(math.pi * w for w in _floats(settings["omega_over_pi"]))
        else:
            omegas = (PRESETS[name]["Omega"],)
        params = preset(name, Omega=omegas[0], **overrides)
        kw = {}
        if "reference_factor" in settings:
            kw["reference_factor"] = float(settings["reference_factor"])
        if "orders" in settings:
            kw["orders"] = tuple(int(v) for v in _floats(settings["orders"]))
        if "segments" in settings:
            kw["segments"] = tuple(int(v) for v in _floats(settings["segments"]))
        if "samples" in settings:
            kw["samples"] = int(settings["samples"])
        if "seed" in settings:
            kw["seed"] = int(settings["seed"])
        if "out" in settings:
            kw["out"] = Path(settings["out"])
        return RunConfig(
            params=params,
            omegas=tuple(sorted(omegas)),
            t_end=float(settings["t_end"]),
            tol=Tolerances(float(settings["rtol"]), float(settings["atol"])),
            **kw,
        )
    except (ConfigError, NonStroboscopic):
        raise
    except (ValueError, AveragingError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None, command: str, **overrides) -> RunConfig:
    raw = parse_config(Path(path).read_text()) if path is not None else {}
    raw.update({k: str(v) for k, v in overrides.items() if v is not None})
    return build_config(command, raw)
