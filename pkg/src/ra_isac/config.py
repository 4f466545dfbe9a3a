"""Experiment configuration and its JSON form.

JSON keys mirror the dataclass field names. Angles are radians, powers are
watts, and fields ending in ``_db`` are decibels.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .channel import ScenarioDistribution
from .metrics import WeightPair
from .solver import SolverOptions

__all__ = [
    "SCHEMES",
    "ConfigError",
    "ExperimentConfig",
    "default_weight_grid",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "default_config",
]

SCHEMES = ("proposed", "beamforming-only", "rotation-only-zf")


class ConfigError(ValueError):
    """Malformed configuration; the message starts with the offending field path."""


def default_weight_grid() -> tuple:
    return tuple(WeightPair.from_comm(i / 10) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: ScenarioDistribution = field(default_factory=ScenarioDistribution)
    schemes: tuple = SCHEMES
    weight_grid: tuple = field(default_factory=default_weight_grid)
    monte_carlo_runs: int = 20
    seed: int = 0
    grid_points: int = 361
    output_path: str = "results/tradeoff.csv"
    options: SolverOptions = field(default_factory=SolverOptions)
    pattern_points: int = 241

    def __post_init__(self):
        if self.monte_carlo_runs < 1:
            raise ValueError("monte_carlo_runs must be >= 1")
        if not self.weight_grid:
            raise ValueError("weight_grid must not be empty")
        if not self.schemes:
            raise ValueError("schemes must not be empty")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ValueError(f"unknown scheme(s) {unknown}; choose from {SCHEMES}")
        if self.grid_points < 2 or self.pattern_points < 2:
            raise ValueError("grid_points and pattern_points must be >= 2")

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_DEFAULTS = ExperimentConfig()


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _coerce(value, default, path):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            _fail(path, "expected true/false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(path, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            _fail(path, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or len(value) != len(default):
            _fail(path, f"expected a list of {len(default)} numbers, got {value!r}")
        return tuple(_coerce(v, d, f"{path}[{i}]") for i, (v, d) in enumerate(zip(value, default)))
    return value


def _build(cls, data, path):
    if not isinstance(data, dict):
        _fail(path, "expected an object")
    known = {f.name: f for f in fields(cls) if f.init}
    for key in data:
        if key not in known:
            _fail(f"{path}.{key}", "unknown key")
    defaults = cls()
    kwargs = {key: _coerce(value, getattr(defaults, key), f"{path}.{key}") for key, value in data.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        _fail(path, str(exc))


def _weights(data, path):
    if not isinstance(data, list) or not data:
        _fail(path, "expected a non-empty list")
    out = []
    for i, item in enumerate(data):
        where = f"{path}[{i}]"
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            try:
                out.append(WeightPair.from_comm(item))
            except ValueError as exc:
                _fail(where, str(exc))
        elif isinstance(item, dict):
            for key in item:
                if key not in ("comm_weight", "sense_weight"):
                    _fail(f"{where}.{key}", "unknown key")
            try:
                out.append(WeightPair(float(item["comm_weight"]), float(item["sense_weight"])))
            except KeyError as exc:
                _fail(f"{where}.{exc.args[0]}", "missing")
            except (TypeError, ValueError) as exc:
                _fail(where, str(exc))
        else:
            _fail(where, "expected a number or {comm_weight, sense_weight}")
    return tuple(out)


def config_from_dict(data: dict, path: str = "config") -> ExperimentConfig:
    if not isinstance(data, dict):
        _fail(path, "expected an object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            _fail(f"{path}.{key}", "unknown key")
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}"
        if key == "distribution":
            kwargs[key] = _build(ScenarioDistribution, value, where)
        elif key == "options":
            kwargs[key] = _build(SolverOptions, value, where)
        elif key == "weight_grid":
            kwargs[key] = _weights(value, where)
        elif key == "schemes":
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                _fail(where, "expected a list of scheme names")
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = _coerce(value, getattr(_DEFAULTS, key), where)
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        _fail(path, str(exc))


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "distribution": config.distribution.to_dict(),
        "schemes": list(config.schemes),
        "weight_grid": [asdict(w) for w in config.weight_grid],
        "monte_carlo_runs": config.monte_carlo_runs,
        "seed": config.seed,
        "grid_points": config.grid_points,
        "output_path": config.output_path,
        "options": asdict(config.options),
        "pattern_points": config.pattern_points,
    }


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def default_config(name: str = "default") -> ExperimentConfig:
    """A configuration shipped with the package (``default`` or ``beampattern``)."""
    text = resources.files("ra_isac.configs").joinpath(f"{name}.json").read_text()
    return config_from_dict(json.loads(text))
