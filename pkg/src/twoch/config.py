"""Scenario configuration: dataclass, ``key = value`` parser and validation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from twoch.errors import ConfigError

SCENARIOS = ("steady_background", "single_peakon", "peakon_antipeakon",
             "dambreak_2ch", "atom_test")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "single_peakon"
    x_lo: float = -20.0
    x_hi: float = 20.0
    n: int = 2001
    # label grid; None picks [x_lo, x_hi + mu(R)] with m = n nodes
    xi_lo: float | None = None
    xi_hi: float | None = None
    m: int | None = None
    dt: float = 1e-3
    t_max: float = 1.0
    output_times: tuple = ()
    amplitude: float = 1.0
    x0: float = 0.0
    separation: float = 3.0
    k: float = 0.0
    width: float = 2.0
    delta: float = 0.5
    atom_position: float = 0.0
    atom_mass: float = 1.0
    kappa: float = 0.0
    eta: float = 1.0
    u_minus_inf: float = 0.0
    densities: tuple = ()
    g_bound: float = 1e-7
    bc_tol: float = 1e-6
    compat_tol: float = 1e-2

    def times(self):
        """Output times, defaulting to the start and the end of the run."""
        return self.output_times or (0.0, self.t_max)


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_INT = {"n", "m"}
_OPTIONAL = {"xi_lo", "xi_hi", "m"}
_TUPLES = {"output_times", "densities"}


def _coerce(key, value):
    if key not in _FIELDS:
        raise ConfigError(f"unknown configuration key '{key}'")
    if value is None:
        if key in _OPTIONAL:
            return None
        raise ConfigError(f"'{key}' needs a value")
    if key == "scenario":
        return str(value).strip()
    try:
        if key in _TUPLES:
            if isinstance(value, str):
                items = [s for s in (p.strip() for p in value.split(",")) if s]
            else:
                items = list(value)
            return tuple(float(v) for v in items)
        if key in _INT:
            v = float(value)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse '{key}' from {value!r}") from None


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; lists are comma-separated."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        out[key] = value
    return out


def make_config(values: dict | None = None, **overrides) -> ScenarioConfig:
    """Build and validate a config from string or typed values."""
    merged = dict(values or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kw = {k: _coerce(k, v) for k, v in merged.items()}
    cfg = ScenarioConfig(**kw)
    validate_config(cfg)
    return cfg


def load_config(path, **overrides) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    return make_config(parse_config_text(text), **overrides)


def validate_config(cfg: ScenarioConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario '{cfg.scenario}'; choose from {', '.join(SCENARIOS)}")
    for name, f in _FIELDS.items():
        v = getattr(cfg, name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"'{name}' must be finite")
    if not cfg.x_lo < cfg.x_hi:
        raise ConfigError("x_lo must be below x_hi")
    if cfg.n < 3 or (cfg.m is not None and cfg.m < 3):
        raise ConfigError("grids need at least 3 nodes")
    if (cfg.xi_lo is None) != (cfg.xi_hi is None):
        raise ConfigError("xi_lo and xi_hi must be given together")
    if not cfg.dt > 0.0:
        raise ConfigError("dt must be positive")
    if not cfg.t_max >= 0.0:
        raise ConfigError("t_max must be nonnegative")
    for t in cfg.output_times:
        if not 0.0 <= t <= cfg.t_max:
            raise ConfigError(f"output time {t} outside [0, {cfg.t_max}]")
    if not cfg.eta > 0.0:
        raise ConfigError("eta must be positive")
    if cfg.delta <= 0.0 or cfg.width <= 0.0:
        raise ConfigError("width and delta must be positive")
    if cfg.scenario == "atom_test" and not cfg.atom_mass > 0.0:
        raise ConfigError("atom_mass must be positive")
    if cfg.scenario == "atom_test" and not cfg.x_lo < cfg.atom_position < cfg.x_hi:
        raise ConfigError("atom_position must lie inside the x-domain")
    for t in cfg.densities:
        if t < 0.0:
            raise ConfigError("densities must be nonnegative")
