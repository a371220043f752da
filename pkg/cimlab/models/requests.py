"""Request bodies for the HTTP surface."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class FitRequest(BaseModel):
    """Distances measured at decreasing eps, to be fitted as ``Λ·eps^φ``."""

    eps: List[float] = Field(min_length=3)
    distances: List[float] = Field(min_length=3)


class SimulateRequest(BaseModel):
    """A short trajectory from seeded random low-mode data."""

    flow: Literal["parabolic", "hyperbolic"] = "parabolic"
    eps: float = Field(default=0.1, gt=0.0, le=1.0)
    n_modes: int = Field(default=16, ge=1, le=128)
    dt: float = Field(default=1e-3, gt=0.0)
    T: float = Field(default=1.0, ge=0.0, le=50.0)
    seed: int = 0
    amplitude: float = Field(default=0.5, ge=0.0)
    forcing: float = Field(default=0.0)
    use_modified_nonlinearity: bool = False
    delta: float = Field(default=1.5, gt=1.0)
    slack: Optional[float] = Field(default=None, gt=0.0)
