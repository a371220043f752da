"""Experiment configuration.

Values are layered, lowest priority first:

1. the defaults on :class:`ExperimentConfig`;
2. a flat ``KEY=VALUE`` file (read with python-dotenv, keys case-insensitive,
   lists comma-separated);
3. environment variables ``CIMLAB_<KEY>``;
4. explicit overrides, normally the CLI flags.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from cimlab.errors import ConfigError
from cimlab.middleware.logging import log_info

ENV_PREFIX = "CIMLAB_"


class ExperimentConfig(BaseModel):
    """Every knob of every subcommand, with the desk-scale defaults."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # gap certification
    delta: float = Field(default=1.5, gt=1.0)
    eps: float = Field(default=1e-3, gt=0.0, le=1.0)
    n_max: int = Field(default=64, ge=1)
    tol: float = Field(default=1e-6, gt=0.0)
    n_star: Optional[int] = Field(default=None, ge=1)

    # flows
    flow: Literal["parabolic", "hyperbolic"] = "parabolic"
    n_modes: int = Field(default=32, ge=1)
    dt: float = Field(default=1e-3, gt=0.0)
    T: float = Field(default=5.0, ge=0.0)
    amplitude: float = Field(default=0.5, ge=0.0)
    data_modes: int = Field(default=4, ge=1)
    forcing: float = 0.0
    use_modified_nonlinearity: bool = False
    slack: float = Field(default=1e-6, gt=0.0)

    # manifold sampling
    grid_extent: float = Field(default=1.5, gt=0.0)
    points_per_axis: int = Field(default=3, ge=1)
    grid_cap: int = Field(default=729, ge=1)
    T_relax: float = Field(default=1.0, gt=0.0)
    graph_tol: float = Field(default=1e-7, gt=0.0)
    max_iter: int = Field(default=200, ge=1)
    t_horizon: float = Field(default=10.0, gt=0.0)
    t_grid_size: int = Field(default=16, ge=1)
    n_tau: int = Field(default=3, ge=1)
    tau3_parabolic: float = Field(default=0.0, ge=0.0)
    tau3_hyperbolic: float = Field(default=0.0, ge=0.0)
    compact_map: Literal["decomposed", "semiflow"] = "decomposed"
    invariance_sigma: float = Field(default=0.1, gt=0.0)
    invariance_tol: float = Field(default=1e-2, gt=0.0)

    # robustness
    eps_list: List[float] = Field(default_factory=lambda: [1e-3, 5e-4, 2.5e-4, 1.25e-4])
    synthetic_distances: Optional[List[float]] = None
    singular_eps: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4, 1e-5])
    singular_modes: int = Field(default=16, ge=1)
    velocity_offset: float = 1.0
    workers: int = Field(default=1, ge=1)

    # run
    seed: int = 0
    out: str = "out"

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.data_modes > self.n_modes:
            raise ValueError("data_modes cannot exceed n_modes")
        if any(not 0.0 < e <= 1.0 for e in self.eps_list + self.singular_eps):
            raise ValueError("eps values must lie in (0, 1]")
        if self.synthetic_distances is not None and len(self.synthetic_distances) != len(self.eps_list):
            raise ValueError("synthetic_distances needs one entry per eps_list value")
        return self


_FIELDS = set(ExperimentConfig.model_fields)
_LIST_FIELDS = {"eps_list", "synthetic_distances", "singular_eps"}


def _field_name(key: str) -> Optional[str]:
    lowered = key.strip().lower()
    for name in _FIELDS:
        if name.lower() == lowered:
            return name
    return None


def _coerce(name: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if name in _LIST_FIELDS:
        if not text:
            return None if name == "synthetic_distances" else []
        return [item.strip() for item in text.split(",") if item.strip()]
    if text == "" and name == "n_star":
        return None
    return text


def read_config_file(path: Path | str) -> Dict[str, Any]:
    """Parse a ``KEY=VALUE`` file; unknown keys are an error."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: Dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        name = _field_name(key)
        if name is None:
            raise ConfigError(f"unknown config key {key!r} in {path}")
        values[name] = _coerce(name, raw if raw is not None else "")
    return values


def read_env(environ: Mapping[str, str]) -> Dict[str, Any]:
    """Collect ``CIMLAB_<KEY>`` overrides; other variables are ignored."""
    values: Dict[str, Any] = {}
    for key, raw in environ.items():
        if not key.upper().startswith(ENV_PREFIX):
            continue
        name = _field_name(key[len(ENV_PREFIX) :])
        if name is not None:
            values[name] = _coerce(name, raw)
    return values


def load_config(
    path: Optional[Path | str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> ExperimentConfig:
    """Merge defaults, file, environment and overrides into one config."""
    merged: Dict[str, Any] = {}
    if path is not None:
        merged.update(read_config_file(path))
    merged.update(read_env(os.environ if environ is None else environ))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        name = _field_name(key)
        if name is None:
            raise ConfigError(f"unknown override {key!r}")
        merged[name] = _coerce(name, value)
    try:
        config = ExperimentConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    log_info("config_loaded", source=str(path) if path else "defaults", keys=sorted(merged))
    return config
