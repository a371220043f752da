"""Pydantic models for sampled inertial manifolds and their point clouds.

Parabolic points are coefficient vectors ``(n_modes,)``; hyperbolic points
are position/velocity pairs ``(2, n_modes)``.  Arrays carry the batch axis
first.
"""

from __future__ import annotations

from typing import Any, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .spectral import ProductState, SpectralField, frozen_array

FlowKind = Literal["parabolic", "hyperbolic"]


def _point_rank(kind: FlowKind) -> int:
    return 1 if kind == "parabolic" else 2


class ManifoldSettings(BaseModel):
    """Sampling and relaxation settings for the graph fit and the low-mode grid."""

    model_config = ConfigDict(frozen=True)

    grid_extent: float = Field(default=1.5, gt=0.0)
    points_per_axis: int = Field(default=3, ge=1)
    grid_cap: int = Field(default=729, ge=1)
    T_relax: float = Field(default=1.0, gt=0.0)
    tol: float = Field(default=1e-7, gt=0.0)
    max_iter: int = Field(default=200, ge=1)
    seed: int = 0


class GraphSample(BaseModel):
    """Values ``m(ξ)`` of a graph function over a finite set of low-mode points.

    ``xi`` has shape ``(M, n_low)`` (parabolic) or ``(M, 2, n_low)``
    (hyperbolic); ``values`` has the matching full-mode shape and vanishes on
    the first ``n_low`` modes.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: FlowKind
    n_low: int = Field(ge=1)
    eps: Optional[float] = None
    tol: float = Field(gt=0.0)
    xi: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray

    @field_validator("xi", "values", "residual", mode="before")
    @classmethod
    def _freeze(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=float, copy=True)
        arr.setflags(write=False)
        return arr

    @field_validator("converged", mode="before")
    @classmethod
    def _freeze_flags(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=bool, copy=True)
        arr.setflags(write=False)
        return arr

    @field_validator("iterations", mode="before")
    @classmethod
    def _freeze_counts(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=int, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self) -> "GraphSample":
        rank = _point_rank(self.kind)
        if self.xi.ndim != rank + 1 or self.values.ndim != rank + 1:
            raise ValueError(f"{self.kind} samples need rank-{rank + 1} arrays")
        m = self.xi.shape[0]
        for arr in (self.values, self.converged, self.residual, self.iterations):
            if arr.shape[0] != m:
                raise ValueError("every per-point array needs one entry per grid point")
        if self.xi.shape[-1] != self.n_low:
            raise ValueError(f"grid points must have {self.n_low} low modes")
        if self.values.shape[-1] < self.n_low:
            raise ValueError("values must carry at least n_low modes")
        if np.any(self.values[..., : self.n_low] != 0.0):
            raise ValueError("graph values must vanish on the low modes")
        if np.any(self.residual[self.converged] > self.tol):
            raise ValueError("converged points must have residual within tol")
        return self

    @property
    def size(self) -> int:
        return int(self.xi.shape[0])

    @property
    def n_modes(self) -> int:
        return int(self.values.shape[-1])

    def points(self, converged_only: bool = True) -> np.ndarray:
        """Graph points ``ξ + m(ξ)`` as full-mode arrays."""
        full = np.array(self.values)
        full[..., : self.n_low] = self.xi
        return full[self.converged] if converged_only else full


class ManifoldCloud(BaseModel):
    """Finite sample of a manifold-like set with per-point provenance ``(τ, t)``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: FlowKind
    eps: Optional[float] = None
    points: np.ndarray
    tau: np.ndarray
    t: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _freeze_points(cls, value: Any) -> np.ndarray:
        arr = np.array(value, dtype=float, copy=True)
        if arr.ndim < 2 or arr.shape[0] < 1:
            raise ValueError("a cloud needs at least one point")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cloud points must be finite")
        arr.setflags(write=False)
        return arr

    @field_validator("tau", "t", mode="before")
    @classmethod
    def _freeze_provenance(cls, value: Any) -> np.ndarray:
        return frozen_array(value, 1, "provenance")

    @model_validator(mode="after")
    def _check(self) -> "ManifoldCloud":
        if self.points.ndim != _point_rank(self.kind) + 1:
            raise ValueError(f"{self.kind} clouds need rank-{_point_rank(self.kind) + 1} point arrays")
        if self.tau.shape[0] != self.size or self.t.shape[0] != self.size:
            raise ValueError("provenance needs one entry per point")
        return self

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def n_modes(self) -> int:
        return int(self.points.shape[-1])

    def fields(self) -> List[SpectralField]:
        if self.kind != "parabolic":
            raise ValueError("hyperbolic clouds hold product states")
        return [SpectralField(coeffs=p) for p in self.points]

    def states(self) -> List[ProductState]:
        if self.kind != "hyperbolic":
            raise ValueError("parabolic clouds hold single fields")
        return [ProductState.from_arrays(p[0], p[1]) for p in self.points]


class WindowTimes(BaseModel):
    """Window starts, entry time and sampling grids for the cloud builders."""

    model_config = ConfigDict(frozen=True)

    c: Tuple[float, float, float]
    tau3: float = Field(ge=0.0)
    I3_grid: Tuple[float, ...]
    t_horizon: float = Field(default=10.0, gt=0.0)
    t_grid_size: int = Field(default=16, ge=1)
    n_star: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "WindowTimes":
        if any(x < 0.0 for x in self.c) or any(b < a for a, b in zip(self.c, self.c[1:])):
            raise ValueError("window starts must be nonnegative and nondecreasing")
        slack = 1e-12 * max(1.0, self.tau3)
        for tau in self.I3_grid:
            if not self.tau3 - slack <= tau <= 2.0 * self.tau3 + slack:
                raise ValueError(f"I3 sample {tau} outside [{self.tau3}, {2.0 * self.tau3}]")
        return self

    @classmethod
    def build(
        cls,
        c: Tuple[float, float, float],
        tau3: float,
        n_tau: int = 3,
        t_horizon: float = 10.0,
        t_grid_size: int = 16,
        n_star: Optional[int] = None,
    ) -> "WindowTimes":
        """Windows with ``n_tau`` evenly spaced samples of ``[tau3, 2·tau3]``."""
        grid = tuple(sorted({float(x) for x in np.linspace(tau3, 2.0 * tau3, max(1, n_tau))}))
        return cls(c=c, tau3=tau3, I3_grid=grid, t_horizon=t_horizon, t_grid_size=t_grid_size, n_star=n_star)

    def stage_samples(self) -> List[np.ndarray]:
        """Absolute sample times of the three windows along one trajectory.

        Stage ``j`` starts where the previous window ended (``o_0 = 0``) and
        samples ``o_j + c_j + s`` for ``s`` in ``[0, t_horizon]``.
        """
        stages: List[np.ndarray] = []
        offset = 0.0
        grid = np.linspace(0.0, self.t_horizon, self.t_grid_size)
        for start in self.c:
            stages.append(offset + start + grid)
            offset += start + self.t_horizon
        return stages

    def window_samples(self) -> np.ndarray:
        """Sample times of the last window."""
        return self.stage_samples()[-1]


class ManifoldAudit(BaseModel):
    """Scalar manifold check ``value <= bound`` (or ``value > bound`` for rates)."""

    name: str
    value: float
    bound: float
    passed: bool
    n_checked: int = 0
    detail: str = ""


class AttractionReport(BaseModel):
    """Distance from evolved data to a cloud over time and its fitted decay rate."""

    times: List[float]
    distances: List[float]
    rate: float
    passed: bool
