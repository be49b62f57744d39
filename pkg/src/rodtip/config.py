"""Run configuration: a flat ``key: value`` file merged with command-line overrides."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import yaml

from .core import HBAR_CODATA, STANDARD_GRAVITY, RodParameters, natural_units
from .errors import ConfigError

UNITS = ("natural", "si")
POTENTIALS = ("cosine", "quadratic")
ENGINES = ("analytic", "numeric", "both")
NATURAL_DEFAULT_HBAR = 0.01

# file keys that differ from the attribute names
_ALIASES = {"units_mode": "units", "grid": "n_points", "engine": "engines"}


@dataclass
class RunConfig:
    units: str = "natural"
    mass: float | None = None
    half_length: float | None = None
    gravity: float | None = None
    hbar: float | None = None
    sigma: float = 0.1
    n_points: int = 1024
    dt: float | None = None
    potential: str = "cosine"
    engines: tuple = ("analytic", "numeric")
    out: str = "rodtip-out"
    jobs: int = 1
    validity_threshold: float = 0.1
    tolerance: float = 0.05
    quadratic_tolerance: float = 0.01

    def params(self) -> RodParameters:
        if self.units == "natural":
            return natural_units(self.hbar)
        return RodParameters(mass=self.mass, half_length=self.half_length,
                             gravity=self.gravity, hbar=self.hbar)

    def resolved(self) -> dict:
        out = asdict(self)
        out["engines"] = list(self.engines)
        p = self.params()
        out.update(mass=p.mass, half_length=p.half_length, gravity=p.gravity, hbar=p.hbar)
        return out


def load_file(path) -> dict:
    """Read a flat mapping of scalars (YAML syntax, ``key: value`` per line)."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc.strerror}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"config file {path} is not valid key-value text: {exc}"]) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError([f"config file {path} must contain key: value pairs"])
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError([f"config file {path}: nested section(s) {nested} not allowed; use flat keys"])
    return {_ALIASES.get(str(k), str(k)): v for k, v in data.items()}


def _number(problems, name, value, kind=float):
    if value is None:
        return None
    if isinstance(value, bool):
        problems.append(f"{name}: expected a number, got {value!r}")
        return None
    try:
        x = kind(value)
    except (TypeError, ValueError):
        problems.append(f"{name}: expected a number, got {value!r}")
        return None
    if kind is float and not math.isfinite(x):
        problems.append(f"{name}: must be finite, got {value!r}")
        return None
    if kind is int and float(value) != x:
        problems.append(f"{name}: expected an integer, got {value!r}")
        return None
    return x


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file values and overrides (overrides win) and validate everything at once."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    problems = [f"unknown key {k!r}" for k in sorted(merged) if k not in known]
    vals = {k: v for k, v in merged.items() if k in known}

    units = str(vals.get("units", "natural")).lower()
    if units not in UNITS:
        problems.append(f"units: must be one of {UNITS}, got {units!r}")
    cfg = {"units": units}

    for name in ("mass", "half_length", "gravity", "hbar", "dt", "validity_threshold",
                 "tolerance", "quadratic_tolerance"):
        x = _number(problems, name, vals.get(name))
        if x is not None and x <= 0:
            problems.append(f"{name}: must be positive, got {x!r}")
        cfg[name] = x
    for name, default in (("validity_threshold", 0.1), ("tolerance", 0.05), ("quadratic_tolerance", 0.01)):
        if cfg[name] is None:
            cfg[name] = default
    sigma = _number(problems, "sigma", vals.get("sigma", 0.1))
    cfg["sigma"] = 0.1 if sigma is None else sigma

    n = _number(problems, "n_points", vals.get("n_points", 1024), int)
    if n is not None and n < 64:
        problems.append(f"n_points: need at least 64 grid nodes, got {n}")
    cfg["n_points"] = n if n is not None else 1024
    jobs = _number(problems, "jobs", vals.get("jobs", 1), int)
    if jobs is not None and jobs < 1:
        problems.append(f"jobs: must be >= 1, got {jobs}")
    cfg["jobs"] = jobs or 1

    pot = str(vals.get("potential", "cosine")).lower()
    if pot not in POTENTIALS:
        problems.append(f"potential: must be one of {POTENTIALS}, got {pot!r}")
    cfg["potential"] = pot

    engines = vals.get("engines", ("analytic", "numeric"))
    if isinstance(engines, str):
        engines = [e.strip() for e in engines.split(",") if e.strip()]
    engines = [str(e).lower() for e in engines]
    bad = [e for e in engines if e not in ENGINES]
    if bad or not engines:
        problems.append(f"engine: must be drawn from {ENGINES}, got {engines!r}")
    if "both" in engines:
        engines = ["analytic", "numeric"]
    cfg["engines"] = tuple(e for e in ("analytic", "numeric") if e in engines) or ("analytic", "numeric")
    cfg["out"] = str(vals.get("out", "rodtip-out"))

    if units == "natural":
        for name in ("mass", "half_length", "gravity"):
            if cfg[name] is not None and cfg[name] != 1.0:
                problems.append(f"{name}: fixed to 1 in natural units; use units: si to set it")
        cfg.update(mass=None, half_length=None, gravity=None)
        if cfg["hbar"] is None and vals.get("hbar") is None:
            cfg["hbar"] = NATURAL_DEFAULT_HBAR
    elif units == "si":
        for name in ("mass", "half_length"):
            if cfg[name] is None and vals.get(name) is None:
                problems.append(f"{name}: required in SI units")
        if cfg["gravity"] is None and vals.get("gravity") is None:
            cfg["gravity"] = STANDARD_GRAVITY
        if cfg["hbar"] is None and vals.get("hbar") is None:
            cfg["hbar"] = HBAR_CODATA

    if problems:
        raise ConfigError(problems)
    return RunConfig(**cfg)
