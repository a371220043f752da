"""Pydantic models for spectral gap certification."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field


class Margin(BaseModel):
    """One evaluated gap inequality ``lhs > rhs`` at split index ``n``."""

    condition: str
    n: int
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs > self.rhs


class GapCertificate(BaseModel):
    """Outcome of checking the gap conditions for a cutoff level and an eps.

    ``n_star_hyperbolic`` is ``None`` when no split index up to the search
    limit qualifies.  ``eps_s_found`` is false when the threshold search
    found no certified eps at all, in which case ``eps_s_estimate`` is 0.
    """

    delta: float = Field(gt=1.0)
    ell: float
    n_star_parabolic: int = Field(ge=1)
    eps: float
    n_star_hyperbolic: Optional[int] = None
    eps_s_estimate: float = Field(ge=0.0, le=0.25)
    eps_s_found: bool = True
    margins: List[Margin] = Field(default_factory=list)


class EigenPair(BaseModel):
    """Characteristic roots ``α ± sqrt(α² - λ_j)`` of a hyperbolic mode."""

    eps: float
    j: int
    alpha: float
    slow_real: float
    slow_imag: float
    fast_real: float
    fast_imag: float

    @property
    def is_real(self) -> bool:
        return self.slow_imag == 0.0 and self.fast_imag == 0.0
