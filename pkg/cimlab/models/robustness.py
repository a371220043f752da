"""Pydantic models for distances, the eps-sweep and the singular-limit run."""

from __future__ import annotations

import math
from typing import List, Tuple

from pydantic import BaseModel, Field, model_validator


class HausdorffReport(BaseModel):
    """Semidistances between two clouds and the symmetric distance."""

    d_uv: float = Field(ge=0.0)
    d_vu: float = Field(ge=0.0)
    dist: float = Field(ge=0.0)
    k: int
    eps: float

    @model_validator(mode="after")
    def _check(self) -> "HausdorffReport":
        if self.dist != max(self.d_uv, self.d_vu):
            raise ValueError("dist must be the larger semidistance")
        return self


class RobustnessFit(BaseModel):
    """Least-squares fit ``log d = phi·log eps + log Lambda``."""

    eps_values: List[float]
    distances: List[float]
    Lambda: float = Field(gt=0.0)
    phi: float
    r_squared: float

    @model_validator(mode="after")
    def _check(self) -> "RobustnessFit":
        if len(self.eps_values) != len(self.distances) or len(self.eps_values) < 3:
            raise ValueError("a fit needs at least three (eps, distance) pairs")
        if not math.isfinite(self.phi):
            raise ValueError("fitted exponent must be finite")
        return self


class SweepRow(BaseModel):
    eps: float
    d_uv: float
    d_vu: float
    dist: float


class SweepResult(BaseModel):
    """Per-eps distances between the hyperbolic and the lifted parabolic manifold."""

    rows: List[SweepRow]
    fit: RobustnessFit


class SingularLimitReport(BaseModel):
    """Sup over a time window of ``‖S_eps(t)x0 - L S_p(t) u0‖`` in ``X^eps_1``."""

    eps: float
    sup_t_norm: float = Field(ge=0.0)
    window: Tuple[float, float]
    times: List[float]
    norms: List[float]


class TailAudit(BaseModel):
    """``‖Q_N m(χ)‖₁ <= ‖m(χ)‖₃ · Σ_{n>N} n^{-2}`` over a graph sample."""

    n: int = Field(ge=1)
    tail: float
    n_checked: int
    max_ratio: float
    passed: bool
