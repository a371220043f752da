"""Spectral gap certification for the parabolic operator and the eps-family.

The modified nonlinearity ``f - γ(u)³ + γ(u)`` is globally Lipschitz with
constant ``ℓ = 1 + 3(2δ-1)²``.  A split index ``N`` qualifies when the gap
``ν_{N+1} - ν_N`` exceeds ``4ℓ`` and ``ν_{N+1}`` exceeds ``2ℓ``.

For the hyperbolic problem the eigenvalues are computed in the rescaled clock
``s = t/sqrt(eps)`` as ``α ± sqrt(α² - λ_j)`` with ``α = 1/(2 sqrt(eps))``;
the gap test converts them back to the original clock (multiply by ``2α``),
so that the slow branch tends to ``λ_j`` as eps goes to 0 and the test
reduces to the parabolic one.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from cimlab.errors import DomainError
from cimlab.middleware.logging import log_info
from cimlab.models.gap import EigenPair, GapCertificate, Margin

EPS_S_CEILING = 0.25
EPS_S_SCAN_POINTS = 2048
DEFAULT_N_MAX = 64
DEFAULT_TOL = 1e-6


def _check_delta(delta: float) -> None:
    if not delta > 1.0:
        raise DomainError(f"delta must exceed 1, got {delta}")


def lipschitz_constant(delta: float) -> float:
    """ℓ = 1 + 3(2δ-1)², the Lipschitz constant of the modified nonlinearity."""
    _check_delta(delta)
    return 1.0 + 3.0 * (2.0 * delta - 1.0) ** 2


def _parabolic_holds(n: int, ell: float) -> bool:
    lam_n = float(n * n)
    lam_next = float((n + 1) * (n + 1))
    return lam_next - lam_n > 4.0 * ell and lam_next > 2.0 * ell


def parabolic_min_dim(delta: float) -> int:
    """Smallest ``N`` with ``λ_{N+1} - λ_N > 4ℓ`` and ``λ_{N+1} > 2ℓ``.

    Equivalent to the smallest integer strictly above ``24δ(δ-1) + 7.5``; the
    closed form only seeds the search, the raw inequalities decide.
    """
    ell = lipschitz_constant(delta)
    n = max(1, int(24.0 * delta * (delta - 1.0) + 7.5) - 1)
    while not _parabolic_holds(n, ell):
        n += 1
    return n


def _alpha(eps: float) -> float:
    return 1.0 / (2.0 * math.sqrt(eps))


def hyperbolic_eigenvalues(eps: float, j: int) -> Tuple[complex, complex]:
    """Roots of ``μ² - 2αμ + λ_j = 0`` as ``(slow, fast)``.

    Both roots are real (``α ∓ sqrt(α² - λ_j)``) when ``eps <= 1/(4λ_j)``
    and form a conjugate pair with real part ``α`` otherwise.
    """
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    if j < 1:
        raise DomainError(f"mode index must be positive, got {j}")
    alpha = _alpha(eps)
    lam = float(j * j)
    disc = alpha * alpha - lam
    if disc < 0.0:
        root = cmath.sqrt(disc)
        return complex(alpha) - root, complex(alpha) + root
    # product of the roots is λ_j, which keeps the slow root free of cancellation
    fast = alpha + math.sqrt(disc)
    return complex(lam / fast, 0.0), complex(fast, 0.0)


def eigen_pair(eps: float, j: int) -> EigenPair:
    slow, fast = hyperbolic_eigenvalues(eps, j)
    return EigenPair(
        eps=eps,
        j=j,
        alpha=_alpha(eps),
        slow_real=slow.real,
        slow_imag=slow.imag,
        fast_real=fast.real,
        fast_imag=fast.imag,
    )


def slow_rates(eps: float, n: int) -> np.ndarray:
    """Real parts of the slow roots for modes ``1..n`` in the original clock."""
    alpha = _alpha(eps)
    lam = np.arange(1, n + 1, dtype=float) ** 2
    disc = np.maximum(alpha * alpha - lam, 0.0)
    # α - sqrt(α² - λ) loses digits for small λ/α²; use λ/(α + sqrt(α² - λ))
    slow = np.where(alpha * alpha >= lam, lam / (alpha + np.sqrt(disc)), alpha)
    return 2.0 * alpha * slow


def _hyperbolic_split(
    eps: float, ell: float, n_max: int, margins: Optional[List[Margin]] = None
) -> Optional[int]:
    rates = slow_rates(eps, n_max + 1)
    for n in range(1, n_max + 1):
        gap = rates[n] - rates[n - 1]
        nxt = rates[n]
        if margins is not None:
            margins.append(Margin(condition="hyperbolic_gap", n=n, lhs=gap, rhs=4.0 * ell))
            margins.append(Margin(condition="hyperbolic_positivity", n=n, lhs=nxt, rhs=2.0 * ell))
        if gap > 4.0 * ell and nxt > 2.0 * ell:
            return n
    return None


@lru_cache(maxsize=64)
def eps_s_search(delta: float, n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL) -> float:
    """Largest eps in ``(0, 1/4]`` below which every tested eps is certified.

    The success set in eps need not be an interval, so the search first scans
    a uniform grid of ``(0, 1/4]`` for the longest certified prefix and then
    bisects the step that ends it down to ``tol``.  Returns 0 when even the
    first grid point fails.
    """
    ell = lipschitz_constant(delta)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol}")
    step = EPS_S_CEILING / EPS_S_SCAN_POINTS
    grid = step * np.arange(1, EPS_S_SCAN_POINTS + 1)
    last_ok = 0
    for k, eps in enumerate(grid, start=1):
        if _hyperbolic_split(float(eps), ell, n_max) is None:
            break
        last_ok = k
    else:
        log_info("eps_s_search_done", delta=delta, n_max=n_max, eps_s=EPS_S_CEILING)
        return EPS_S_CEILING
    if last_ok == 0:
        log_info("eps_s_search_done", delta=delta, n_max=n_max, eps_s=0.0)
        return 0.0

    lo, hi = float(grid[last_ok - 1]), float(grid[last_ok])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _hyperbolic_split(mid, ell, n_max) is None:
            hi = mid
        else:
            lo = mid
    log_info("eps_s_search_done", delta=delta, n_max=n_max, eps_s=lo)
    return lo


def certify(delta: float, eps: float, n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL) -> GapCertificate:
    """Check both gap conditions and assemble a :class:`GapCertificate`."""
    ell = lipschitz_constant(delta)
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    if n_max < 1:
        raise DomainError(f"n_max must be positive, got {n_max}")

    n_p = parabolic_min_dim(delta)
    lam_n, lam_next = float(n_p * n_p), float((n_p + 1) ** 2)
    margins = [
        Margin(condition="parabolic_gap", n=n_p, lhs=lam_next - lam_n, rhs=4.0 * ell),
        Margin(condition="parabolic_positivity", n=n_p, lhs=lam_next, rhs=2.0 * ell),
    ]
    n_h = _hyperbolic_split(eps, ell, n_max, margins)
    eps_s = eps_s_search(delta, n_max, tol)
    cert = GapCertificate(
        delta=delta,
        ell=ell,
        n_star_parabolic=n_p,
        eps=eps,
        n_star_hyperbolic=n_h,
        eps_s_estimate=eps_s,
        eps_s_found=eps_s > 0.0,
        margins=margins,
    )
    log_info("gap_certified", delta=delta, eps=eps, ell=ell, n_p=n_p, n_h=n_h, eps_s=eps_s)
    return cert
