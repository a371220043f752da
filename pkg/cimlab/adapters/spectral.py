"""Sine-spectral representation on Ω = (0, π).

Fields are handled through their coefficients against
``w_n(x) = sqrt(2/π) sin(n x)``, the Dirichlet eigenfunctions of ``-Δ`` with
eigenvalues ``λ_n = n²``.  Products are formed on a uniform interior grid of
``2·n_modes + 1`` points using the type-I discrete sine transform; on that grid
the projection of a cubed band-limited field back onto the first ``n_modes``
modes is exact, and so is the quadrature of ``u⁴``.

The public functions take :class:`SpectralField`/:class:`ProductState`
values; the underscore-free ``*_coeffs`` helpers work on raw arrays whose
last axis is the mode axis, so the flows can advance many states at once.
"""

from __future__ import annotations

import math
from typing import Dict, Literal, Optional

import numpy as np
from scipy.fft import dst

from cimlab.errors import DomainError, RangeError
from cimlab.models.spectral import CutoffParams, EpsWeight, ProductState, SpectralField

Nonlinearity = Literal["full", "drop_cubic", "off"]


class SineTransform:
    """Synthesis/analysis pair on the dealiased grid for a fixed mode count."""

    def __init__(self, n_modes: int):
        if n_modes < 1:
            raise DomainError("n_modes must be at least 1")
        self.n_modes = n_modes
        self.grid_size = 2 * n_modes + 1
        self.h = math.pi / (self.grid_size + 1)
        self.x = self.h * np.arange(1, self.grid_size + 1)
        self._syn_scale = math.sqrt(2.0 / math.pi) / 2.0
        self._ana_scale = self.h * math.sqrt(2.0 / math.pi) / 2.0

    def synthesis(self, coeffs: np.ndarray) -> np.ndarray:
        """Grid values of the field(s) with the given coefficients."""
        coeffs = np.asarray(coeffs, dtype=float)
        padded = np.zeros(coeffs.shape[:-1] + (self.grid_size,))
        padded[..., : coeffs.shape[-1]] = coeffs
        return self._syn_scale * dst(padded, type=1, axis=-1)

    def analysis(self, values: np.ndarray) -> np.ndarray:
        """First ``n_modes`` sine coefficients of grid values."""
        full = self._ana_scale * dst(np.asarray(values, dtype=float), type=1, axis=-1)
        return full[..., : self.n_modes]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Composite rule over (0, π); the field vanishes at both ends."""
        return self.h * np.sum(values, axis=-1)


# One transform per mode count, built on first use
_transforms: Dict[int, SineTransform] = {}


def get_transform(n_modes: int) -> SineTransform:
    """Get the shared transform for ``n_modes`` modes."""
    transform = _transforms.get(n_modes)
    if transform is None:
        transform = SineTransform(n_modes)
        _transforms[n_modes] = transform
    return transform


# ---------------------------------------------------------------------------
# Eigenvalues and norms
# ---------------------------------------------------------------------------
def eigenvalue(n: int) -> float:
    """λ_n = n² for the Dirichlet Laplacian on (0, π)."""
    if n < 1:
        raise DomainError(f"mode index must be positive, got {n}")
    return float(n * n)


def eigenvalues(n_modes: int) -> np.ndarray:
    """Vector ``(λ_1, ..., λ_{n_modes})``."""
    n = np.arange(1, n_modes + 1, dtype=float)
    return n * n


def hs_norm_sq_coeffs(coeffs: np.ndarray, s: float) -> np.ndarray:
    """Σ_n λ_n^s c_n² along the last axis."""
    coeffs = np.asarray(coeffs, dtype=float)
    weights = eigenvalues(coeffs.shape[-1]) ** s
    return np.sum(weights * coeffs * coeffs, axis=-1)


def norm_hs(field: SpectralField, s: float) -> float:
    """Norm of ``field`` in ``H_s = D(A^{s/2})``."""
    if s < 0:
        raise DomainError(f"Sobolev index must be nonnegative, got {s}")
    return float(math.sqrt(hs_norm_sq_coeffs(field.coeffs, s)))


def _eps_value(eps: EpsWeight | float) -> float:
    if isinstance(eps, EpsWeight):
        return eps.eps
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps must lie in [0, 1], got {eps}")
    return float(eps)


def xeps_norm_sq_coeffs(u: np.ndarray, v: np.ndarray, k: int, eps: float) -> np.ndarray:
    """‖u‖²_k + eps·‖v‖²_{k-1} along the last axis."""
    return hs_norm_sq_coeffs(u, k) + eps * hs_norm_sq_coeffs(v, k - 1)


def norm_xeps(state: ProductState, k: int, eps: EpsWeight | float) -> float:
    """Norm of ``state`` in the eps-weighted product space ``X^eps_k``."""
    if k not in (1, 2, 3):
        raise DomainError(f"k must be 1, 2 or 3, got {k}")
    weight = _eps_value(eps)
    return float(math.sqrt(xeps_norm_sq_coeffs(state.u.coeffs, state.v.coeffs, k, weight)))


def inner(a: SpectralField, b: SpectralField) -> float:
    """L² inner product; the basis is orthonormal."""
    return float(np.dot(a.coeffs, b.coeffs))


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------
def _check_split(field: SpectralField, N: int) -> None:
    if not 1 <= N <= field.n_modes:
        raise RangeError(f"projection index {N} outside 1..{field.n_modes}")


def project_P(field: SpectralField, N: int) -> SpectralField:
    """Keep modes ``1..N``."""
    _check_split(field, N)
    coeffs = np.zeros(field.n_modes)
    coeffs[:N] = field.coeffs[:N]
    return SpectralField(coeffs=coeffs)


def project_Q(field: SpectralField, N: int) -> SpectralField:
    """Keep modes ``N+1..n_modes``."""
    _check_split(field, N)
    coeffs = field.coeffs.copy()
    coeffs[:N] = 0.0
    return SpectralField(coeffs=coeffs)


# ---------------------------------------------------------------------------
# Nonlinear terms
# ---------------------------------------------------------------------------
def cubic_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Sine coefficients of ``u³`` truncated to the input mode count."""
    coeffs = np.asarray(coeffs, dtype=float)
    transform = get_transform(coeffs.shape[-1])
    values = transform.synthesis(coeffs)
    return transform.analysis(values * values * values)


def cubic(field: SpectralField) -> SpectralField:
    """Dealiased coefficients of ``u(x)³``."""
    return SpectralField(coeffs=cubic_coeffs(field.coeffs))


def gamma_values(r: np.ndarray, delta: float) -> np.ndarray:
    """Odd C¹ saturation: identity on ``|r| <= delta``, tanh tail bounded by ``2δ-1``."""
    r = np.asarray(r, dtype=float)
    width = delta - 1.0
    mag = np.abs(r)
    tail = np.sign(r) * (delta + width * np.tanh((mag - delta) / width))
    return np.where(mag <= delta, r, tail)


def gamma_cutoff(r: float, params: CutoffParams) -> float:
    """γ(r) for a single real ``r``."""
    return float(gamma_values(np.asarray(r), params.delta))


def gamma_apply(field: SpectralField, params: CutoffParams) -> SpectralField:
    """Coefficients of ``γ(u(x))`` evaluated pointwise on the dealiased grid."""
    transform = get_transform(field.n_modes)
    values = gamma_values(transform.synthesis(field.coeffs), params.delta)
    return SpectralField(coeffs=transform.analysis(values))


def l4_norm4(field: SpectralField) -> float:
    """∫₀^π u(x)⁴ dx."""
    return float(l4_norm4_coeffs(field.coeffs))


def l4_norm4_coeffs(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    transform = get_transform(coeffs.shape[-1])
    values = transform.synthesis(coeffs)
    sq = values * values
    return transform.integrate(sq * sq)


def reaction_coeffs(
    coeffs: np.ndarray,
    f_coeffs: np.ndarray,
    nonlinearity: Nonlinearity = "full",
    delta: Optional[float] = None,
) -> np.ndarray:
    """Coefficients of ``f - g(u)`` with ``g(u) = u³ - u``.

    With ``delta`` set, ``u`` is replaced by ``γ(u)`` on the grid, giving the
    globally Lipschitz ``f - γ(u)³ + γ(u)``.  ``"drop_cubic"`` keeps ``f + u``
    and ``"off"`` returns zeros.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if nonlinearity == "off":
        return np.zeros_like(coeffs)
    if nonlinearity == "drop_cubic":
        return f_coeffs + coeffs
    transform = get_transform(coeffs.shape[-1])
    values = transform.synthesis(coeffs)
    if delta is not None:
        values = gamma_values(values, delta)
        return f_coeffs + transform.analysis(values - values * values * values)
    return f_coeffs + coeffs - transform.analysis(values * values * values)
