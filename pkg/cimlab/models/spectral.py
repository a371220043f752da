"""Pydantic models for fields on Ω = (0, π).

A scalar field is stored by its coefficients against the normalized
Dirichlet eigenbasis ``w_n(x) = sqrt(2/π) sin(n x)``; ``coeffs[n-1]`` holds
the coefficient of ``w_n``.  Arrays are frozen after validation so that
every value can be shared between threads.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator


def frozen_array(value: Any, ndim: int, what: str = "array") -> np.ndarray:
    """Copy ``value`` into a read-only finite float array of rank ``ndim``."""
    arr = np.array(value, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"{what} must have {ndim} dimension(s), got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be finite")
    arr.setflags(write=False)
    return arr


def _frozen_array(value: Any) -> np.ndarray:
    arr = frozen_array(value, 1, "coefficients")
    if arr.size < 1:
        raise ValueError("at least one mode is required")
    return arr


class SpectralField(BaseModel):
    """Coefficient vector of a scalar field against the sine eigenbasis."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _check_coeffs(cls, value: Any) -> np.ndarray:
        return _frozen_array(value)

    @field_serializer("coeffs")
    def _dump_coeffs(self, coeffs: np.ndarray) -> list[float]:
        return [float(c) for c in coeffs]

    @property
    def n_modes(self) -> int:
        return int(self.coeffs.size)

    @classmethod
    def zeros(cls, n_modes: int) -> "SpectralField":
        return cls(coeffs=np.zeros(n_modes))

    @classmethod
    def basis(cls, n: int, n_modes: int, amplitude: float = 1.0) -> "SpectralField":
        """``amplitude * w_n`` truncated to ``n_modes`` modes."""
        coeffs = np.zeros(n_modes)
        coeffs[n - 1] = amplitude
        return cls(coeffs=coeffs)

    def resized(self, n_modes: int) -> "SpectralField":
        """Zero-pad or truncate to ``n_modes`` modes."""
        coeffs = np.zeros(n_modes)
        k = min(n_modes, self.n_modes)
        coeffs[:k] = self.coeffs[:k]
        return SpectralField(coeffs=coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(coeffs=self.coeffs - other.coeffs)

    def __neg__(self) -> "SpectralField":
        return SpectralField(coeffs=-self.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(coeffs=float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectralField):
            return NotImplemented
        return bool(np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None  # type: ignore[assignment]


class ProductState(BaseModel):
    """Element ``(u, v)`` of ``X_k = H_k × H_{k-1}``; ``v`` plays the role of ``u_t``."""

    model_config = ConfigDict(frozen=True)

    u: SpectralField
    v: SpectralField

    @model_validator(mode="after")
    def _check_modes(self) -> "ProductState":
        if self.u.n_modes != self.v.n_modes:
            raise ValueError("u and v must have the same number of modes")
        return self

    @property
    def n_modes(self) -> int:
        return self.u.n_modes

    @classmethod
    def zeros(cls, n_modes: int) -> "ProductState":
        return cls(u=SpectralField.zeros(n_modes), v=SpectralField.zeros(n_modes))

    @classmethod
    def from_arrays(cls, u: np.ndarray, v: np.ndarray) -> "ProductState":
        return cls(u=SpectralField(coeffs=u), v=SpectralField(coeffs=v))

    def stacked(self) -> np.ndarray:
        """``(2, n_modes)`` array with rows ``u`` and ``v``."""
        return np.stack([self.u.coeffs, self.v.coeffs])

    def __add__(self, other: "ProductState") -> "ProductState":
        return ProductState(u=self.u + other.u, v=self.v + other.v)

    def __sub__(self, other: "ProductState") -> "ProductState":
        return ProductState(u=self.u - other.u, v=self.v - other.v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProductState):
            return NotImplemented
        return self.u == other.u and self.v == other.v

    __hash__ = None  # type: ignore[assignment]


class EpsWeight(BaseModel):
    """Weight ``eps`` of the velocity component in ``X^eps_k``."""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(ge=0.0, le=1.0)


class CutoffParams(BaseModel):
    """Saturation level of the cutoff ``γ``; identity on ``|r| <= delta``."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(gt=1.0)
