"""Pydantic models for the parabolic and hyperbolic semiflows.

Configurations are small immutable records.  Trajectories keep their data as
read-only numpy arrays (one row per recorded time) and hand out
:class:`SpectralField`/:class:`ProductState` views on request.
"""

from __future__ import annotations

from typing import Any, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .spectral import ProductState, SpectralField, frozen_array

Nonlinearity = Literal["full", "drop_cubic", "off"]


class FlowConfig(BaseModel):
    """Settings shared by both flows.

    ``nonlinearity`` selects the reaction term: ``"full"`` is ``f - u³ + u``,
    ``"drop_cubic"`` keeps the linear part ``f + u`` and ``"off"`` integrates
    the bare linear operator.  ``use_modified_nonlinearity`` replaces ``u`` by
    ``γ(u)`` with saturation level ``delta``.
    """

    model_config = ConfigDict(frozen=True)

    n_modes: int = Field(ge=1)
    f: SpectralField = None  # type: ignore[assignment]
    dt: float = Field(default=1e-3, gt=0.0)
    use_modified_nonlinearity: bool = False
    delta: float = Field(default=1.5, gt=1.0)
    nonlinearity: Nonlinearity = "full"

    @model_validator(mode="before")
    @classmethod
    def _default_forcing(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("f") is None and "n_modes" in data:
            data = dict(data)
            data["f"] = SpectralField.zeros(int(data["n_modes"]))
        return data

    @model_validator(mode="after")
    def _check_forcing(self) -> "FlowConfig":
        if self.f.n_modes != self.n_modes:
            raise ValueError(f"forcing has {self.f.n_modes} modes, config has {self.n_modes}")
        return self

    @property
    def cutoff(self) -> Optional[float]:
        """Saturation level passed to the reaction term, or ``None``."""
        return self.delta if self.use_modified_nonlinearity else None


class ParabolicConfig(FlowConfig):
    """Galerkin settings for ``p_t - Δp + p³ - p = f``."""


class HyperbolicConfig(FlowConfig):
    """Galerkin settings for ``eps·u_tt + u_t - Δu + u³ - u = f``.

    The step actually taken is :attr:`effective_dt`, which halves ``dt`` for
    ``eps < 1e-3`` unless ``auto_halve_dt`` is off.
    """

    eps: float = Field(gt=0.0, le=1.0)
    auto_halve_dt: bool = True

    @property
    def effective_dt(self) -> float:
        if self.auto_halve_dt and self.eps < 1e-3:
            return 0.5 * self.dt
        return self.dt

    def parabolic(self) -> ParabolicConfig:
        """Matching parabolic settings on the same time step."""
        return ParabolicConfig(
            n_modes=self.n_modes,
            f=self.f,
            dt=self.effective_dt,
            use_modified_nonlinearity=self.use_modified_nonlinearity,
            delta=self.delta,
            nonlinearity=self.nonlinearity,
        )


def _check_times(times: np.ndarray) -> np.ndarray:
    if times.size < 1:
        raise ValueError("a trajectory needs at least one time")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly increasing")
    return times


class _ArrayRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray

    @field_validator("times", mode="before")
    @classmethod
    def _freeze_times(cls, value: Any) -> np.ndarray:
        return _check_times(frozen_array(value, 1, "times"))

    @property
    def size(self) -> int:
        return int(self.times.size)

    def _check_rows(self, *arrays: np.ndarray) -> None:
        for arr in arrays:
            if arr.shape[0] != self.size:
                raise ValueError(f"expected {self.size} rows, got {arr.shape[0]}")


class TrajectoryRecord(_ArrayRecord):
    """Parabolic trajectory: coefficients and audited norms per recorded time."""

    coeffs: np.ndarray
    l2: np.ndarray
    h1: np.ndarray
    lyapunov: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _freeze_coeffs(cls, value: Any) -> np.ndarray:
        return frozen_array(value, 2, "coeffs")

    @field_validator("l2", "h1", "lyapunov", mode="before")
    @classmethod
    def _freeze_series(cls, value: Any) -> np.ndarray:
        return frozen_array(value, 1, "series")

    @model_validator(mode="after")
    def _check_shapes(self) -> "TrajectoryRecord":
        self._check_rows(self.coeffs, self.l2, self.h1, self.lyapunov)
        return self

    @property
    def n_modes(self) -> int:
        return int(self.coeffs.shape[1])

    def state(self, i: int) -> SpectralField:
        return SpectralField(coeffs=self.coeffs[i])

    @property
    def last(self) -> SpectralField:
        return self.state(-1)

    @property
    def states(self) -> List[SpectralField]:
        return [self.state(i) for i in range(self.size)]


class HyperbolicTrajectory(_ArrayRecord):
    """Hyperbolic trajectory in ``X^eps``; ``v`` holds ``u_t``."""

    eps: float
    u: np.ndarray
    v: np.ndarray
    xeps1: np.ndarray
    xeps2: np.ndarray
    n3: np.ndarray
    energy: np.ndarray

    @field_validator("u", "v", mode="before")
    @classmethod
    def _freeze_coeffs(cls, value: Any) -> np.ndarray:
        return frozen_array(value, 2, "coefficients")

    @field_validator("xeps1", "xeps2", "n3", "energy", mode="before")
    @classmethod
    def _freeze_series(cls, value: Any) -> np.ndarray:
        return frozen_array(value, 1, "series")

    @model_validator(mode="after")
    def _check_shapes(self) -> "HyperbolicTrajectory":
        self._check_rows(self.u, self.v, self.xeps1, self.xeps2, self.n3, self.energy)
        if self.u.shape != self.v.shape:
            raise ValueError("u and v blocks must have the same shape")
        return self

    @property
    def n_modes(self) -> int:
        return int(self.u.shape[1])

    def state(self, i: int) -> ProductState:
        return ProductState.from_arrays(self.u[i], self.v[i])

    @property
    def last(self) -> ProductState:
        return self.state(-1)


class DecomposedTrajectory(_ArrayRecord):
    """Co-integrated ``v`` (decaying part) and ``w`` (compact part).

    Arrays have shape ``(len(times), 2, n_modes)``: row 0 is position, row 1
    velocity.  The full solution is ``v + w``.
    """

    eps: float
    v: np.ndarray
    w: np.ndarray

    @field_validator("v", "w", mode="before")
    @classmethod
    def _freeze_blocks(cls, value: Any) -> np.ndarray:
        arr = frozen_array(value, 3, "state block")
        if arr.shape[1] != 2:
            raise ValueError("state blocks need a position and a velocity row")
        return arr

    @model_validator(mode="after")
    def _check_shapes(self) -> "DecomposedTrajectory":
        self._check_rows(self.v, self.w)
        if self.v.shape != self.w.shape:
            raise ValueError("v and w blocks must have the same shape")
        return self

    @property
    def n_modes(self) -> int:
        return int(self.v.shape[2])

    @property
    def u(self) -> np.ndarray:
        return self.v + self.w

    def v_state(self, i: int) -> ProductState:
        return ProductState.from_arrays(self.v[i, 0], self.v[i, 1])

    def w_state(self, i: int) -> ProductState:
        return ProductState.from_arrays(self.w[i, 0], self.w[i, 1])

    def u_state(self, i: int) -> ProductState:
        return self.v_state(i) + self.w_state(i)

    @property
    def v_states(self) -> List[ProductState]:
        return [self.v_state(i) for i in range(self.size)]

    @property
    def w_states(self) -> List[ProductState]:
        return [self.w_state(i) for i in range(self.size)]

    @property
    def u_states(self) -> List[ProductState]:
        return [self.u_state(i) for i in range(self.size)]


class AuditReport(BaseModel):
    """Result of checking an inequality along a recorded trajectory.

    ``max_violation`` is the largest ``lhs - rhs`` seen (negative when the
    inequality holds everywhere with room to spare); the audit passes when it
    does not exceed ``slack``.
    """

    name: str
    passed: bool
    max_violation: float
    slack: float
    n_checked: int = Field(ge=0)
    first_violation_time: Optional[float] = None
    detail: str = ""
