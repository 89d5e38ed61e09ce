"""Flat JSON configuration files and prior files."""

from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path
from typing import Any

from .experiment import ExperimentConfig

PRIOR_TOL = 1e-9


class ConfigError(ValueError):
    """Malformed configuration or prior file."""


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    if not text.strip():
        return {}
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _as_int(key: str, v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise ConfigError(f"field {key!r}: expected an integer, got {v!r}")
    return v


def _as_float(key: str, v: Any) -> float:
    if not _is_number(v):
        raise ConfigError(f"field {key!r}: expected a finite number, got {v!r}")
    return float(v)


def _as_list(key: str, v: Any) -> list:
    if not isinstance(v, list):
        raise ConfigError(f"field {key!r}: expected a list, got {v!r}")
    return v


_PARSERS = {
    "n_values": lambda k, v: tuple(_as_int(k, x) for x in _as_list(k, v)),
    "hypothesis_count": _as_int,
    "box_half_width": _as_float,
    "w_star": lambda k, v: tuple(_as_float(k, x) for x in _as_list(k, v)),
    "delta": _as_float,
    "seed": _as_int,
    "trials": _as_int,
    "population_mc_samples": _as_int,
    "orders": lambda k, v: tuple(_as_float(k, x) for x in _as_list(k, v)),
}
assert set(_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def config_from_mapping(data: Any, source: str = "<config>") -> ExperimentConfig:
    """Validate a flat mapping and fill missing keys with the defaults."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected a JSON object at top level")
    kwargs = {}
    for key, value in data.items():
        if key not in _PARSERS:
            raise ConfigError(f"{source}: unknown key {key!r}; allowed: {', '.join(_PARSERS)}")
        kwargs[key] = _PARSERS[key](key, value)
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_mapping(_read_json(path), str(path))


def load_prior(path: str | Path) -> dict[str, float]:
    """Read ``{"hypothesis id": mass, ...}``; masses positive and summing to 1."""
    data = _read_json(path)
    if not isinstance(data, dict) or not data:
        raise ConfigError(f"{path}: prior must be a nonempty JSON object of id -> mass")
    prior = {}
    for key, value in data.items():
        if not _is_number(value) or value <= 0:
            raise ConfigError(f"{path}: mass for {key!r} must be a positive number, got {value!r}")
        prior[key] = float(value)
    total = math.fsum(prior.values())
    if abs(total - 1.0) > PRIOR_TOL:
        raise ConfigError(f"{path}: prior masses sum to {total!r}, expected 1 within {PRIOR_TOL}")
    return prior
