"""Comparing the hyperbolic family with its parabolic limit.

The lift ``L u = (u, E u)`` embeds parabolic states in the product space,
and distances are measured in ``X^eps_1``.  ``sweep_eps`` rebuilds the
hyperbolic compact manifold for each eps, compares it with the lifted
parabolic one and fits ``dist ≈ Λ·eps^φ``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import zeta
from scipy.stats import linregress

from cimlab.errors import DomainError, LabError, PipelineError
from cimlab.middleware.logging import log_error, log_info
from cimlab.models.flows import HyperbolicConfig, ParabolicConfig
from cimlab.models.manifold import GraphSample, ManifoldCloud, ManifoldSettings, WindowTimes
from cimlab.models.robustness import RobustnessFit, SingularLimitReport, SweepResult, SweepRow, TailAudit
from cimlab.models.spectral import ProductState, SpectralField

from .distance import semidist, symdist  # noqa: F401  (re-exported)
from .hyperbolic import flow_product
from .manifold import build_compact_manifold, build_omega_K, fit_graph_hyperbolic, low_mode_grid, product_grid
from .parabolic import extension_coeffs, extension_E, flow_coeffs
from .spectral import hs_norm_sq_coeffs, xeps_norm_sq_coeffs


def lift(u: SpectralField, f: SpectralField) -> ProductState:
    """``(u, E u)``: a parabolic state with its own velocity."""
    return ProductState(u=u, v=extension_E(u, f))


def lift_coeffs(coeffs: np.ndarray, f_coeffs: np.ndarray) -> np.ndarray:
    """Batched lift ``(..., n) -> (..., 2, n)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    return np.stack([coeffs, extension_coeffs(coeffs, f_coeffs)], axis=-2)


def lift_cloud(cloud: ManifoldCloud, f: SpectralField, eps: Optional[float] = None) -> ManifoldCloud:
    """Lift every point of a parabolic cloud, keeping provenance."""
    if cloud.kind != "parabolic":
        raise DomainError("only parabolic clouds can be lifted")
    return ManifoldCloud(
        kind="hyperbolic",
        eps=eps,
        points=lift_coeffs(cloud.points, f.coeffs),
        tau=cloud.tau,
        t=cloud.t,
    )


def singular_limit_window(windows: Optional[WindowTimes]) -> Tuple[float, float]:
    """``[τ3, 2τ3]`` from shared windows, or ``[0, 1]`` when ``τ3 = 0``."""
    if windows is None or windows.tau3 == 0.0:
        return (0.0, 1.0)
    return (windows.tau3, 2.0 * windows.tau3)


def run_singular_limit(
    x0: ProductState,
    cfg: HyperbolicConfig,
    window: Tuple[float, float] = (0.0, 1.0),
    n_samples: int = 21,
) -> SingularLimitReport:
    """Sup over ``window`` of ``‖S_eps(t)x0 - L S_p(t)u0‖_{X^eps_1}``.

    Both flows run on the same step (``cfg.effective_dt``).  For lifted data
    ``x0 = L u0`` the difference starts at 0; a velocity offset ``a`` gives
    ``sqrt(eps)·‖a‖`` at ``t = 0``.
    """
    if x0.n_modes != cfg.n_modes:
        raise DomainError(f"state has {x0.n_modes} modes, config has {cfg.n_modes}")
    t0, t1 = window
    if not 0.0 <= t0 <= t1:
        raise DomainError(f"invalid window {window}")
    times = np.linspace(t0, t1, n_samples) if t1 > t0 else np.array([t0])
    hyper = flow_product(x0.stacked(), times, cfg)
    para = flow_coeffs(x0.u.coeffs, times, cfg.parabolic())
    lifted = lift_coeffs(para, cfg.f.coeffs)
    diff = hyper - lifted
    norms = np.sqrt(xeps_norm_sq_coeffs(diff[:, 0], diff[:, 1], 1, cfg.eps))
    report = SingularLimitReport(
        eps=cfg.eps,
        sup_t_norm=float(np.max(norms)),
        window=(float(t0), float(t1)),
        times=times.tolist(),
        norms=norms.tolist(),
    )
    log_info("singular_limit_done", eps=cfg.eps, sup=report.sup_t_norm)
    return report


def fit_power_law(eps_values: Sequence[float], distances: Sequence[float]) -> RobustnessFit:
    """Ordinary least squares of ``log d`` against ``log eps``."""
    eps = np.asarray(eps_values, dtype=float)
    dist = np.asarray(distances, dtype=float)
    if eps.shape != dist.shape or eps.size < 3:
        raise DomainError("need at least three matching (eps, distance) pairs")
    if np.any(eps <= 0.0) or np.any(dist <= 0.0):
        raise DomainError("eps values and distances must be positive for a log-log fit")
    fit = linregress(np.log(eps), np.log(dist))
    return RobustnessFit(
        eps_values=eps.tolist(),
        distances=dist.tolist(),
        Lambda=math.exp(fit.intercept),
        phi=float(fit.slope),
        r_squared=float(fit.rvalue) ** 2,
    )


def hyperbolic_config(cfg: ParabolicConfig, eps: float, auto_halve_dt: bool = False) -> HyperbolicConfig:
    """Hyperbolic settings sharing forcing, modes, step and nonlinearity with ``cfg``."""
    return HyperbolicConfig(
        eps=eps,
        n_modes=cfg.n_modes,
        f=cfg.f,
        dt=cfg.dt,
        use_modified_nonlinearity=cfg.use_modified_nonlinearity,
        delta=cfg.delta,
        nonlinearity=cfg.nonlinearity,
        auto_halve_dt=auto_halve_dt,
    )


def hyperbolic_manifold(
    eps: float,
    windows: WindowTimes,
    cfg: ParabolicConfig,
    settings: ManifoldSettings,
    compact_map: str = "decomposed",
) -> ManifoldCloud:
    """Full hyperbolic pipeline: product grid, graph fit, ω^K cloud, compact manifold."""
    if windows.n_star is None:
        raise DomainError("shared windows must carry N*")
    hcfg = hyperbolic_config(cfg, eps)
    W = low_mode_grid(windows.n_star, settings.grid_extent, settings.points_per_axis, settings.grid_cap, settings.seed)
    grid = product_grid(W, settings.grid_cap, settings.seed)
    graph = fit_graph_hyperbolic(grid, hcfg, settings)
    omega = build_omega_K(graph, windows, "hyperbolic", hcfg, compact_map)
    return build_compact_manifold(omega, windows, "hyperbolic", hcfg)


def _check_eps_list(eps_list: Sequence[float], eps_s: Optional[float]) -> None:
    if len(eps_list) < 3:
        raise DomainError("the sweep needs at least three eps values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps values must be strictly decreasing")
    if any(not 0.0 < e <= 1.0 for e in eps_list):
        raise DomainError("eps values must lie in (0, 1]")
    if eps_s is not None:
        above = [e for e in eps_list if e > eps_s]
        if above:
            raise DomainError(f"eps values {above} exceed the certified threshold {eps_s!r}")


def sweep_eps(
    parabolic_manifold: ManifoldCloud,
    eps_list: Sequence[float],
    shared_windows: WindowTimes,
    cfg: ParabolicConfig,
    settings: Optional[ManifoldSettings] = None,
    eps_s: Optional[float] = None,
    compact_map: str = "decomposed",
    max_workers: int = 1,
) -> SweepResult:
    """Distance between ``M^eps`` and the lifted ``M^0`` for each eps, plus the power-law fit.

    The hyperbolic flows reuse the parabolic step so both manifolds share one
    time discretization.
    """
    _check_eps_list(eps_list, eps_s)
    if parabolic_manifold.kind != "parabolic":
        raise DomainError("the reference manifold must be parabolic")
    settings = settings or ManifoldSettings()

    def one(eps: float) -> SweepRow:
        try:
            cloud = hyperbolic_manifold(eps, shared_windows, cfg, settings, compact_map)
            lifted = lift_cloud(parabolic_manifold, cfg.f, eps)
            report = symdist(cloud, lifted, 1, eps)
        except LabError as exc:
            log_error("sweep_eps_failed", eps=eps, error=str(exc))
            raise PipelineError(str(exc), eps=eps) from exc
        log_info("sweep_eps_done", eps=eps, dist=report.dist)
        return SweepRow(eps=eps, d_uv=report.d_uv, d_vu=report.d_vu, dist=report.dist)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows: List[SweepRow] = list(pool.map(one, eps_list))
    else:
        rows = [one(eps) for eps in eps_list]
    fit = fit_power_law([r.eps for r in rows], [r.dist for r in rows])
    log_info("sweep_fit", Lambda=fit.Lambda, phi=fit.phi, r_squared=fit.r_squared)
    return SweepResult(rows=rows, fit=fit)


def tail_sum(N: int) -> float:
    """``Σ_{n>N} n^{-2}``, the Hurwitz zeta value ``ζ(2, N+1)``."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    return float(zeta(2.0, N + 1))


def check_tail_bound(m_sample: GraphSample, N: int) -> TailAudit:
    """``‖Q_N m(χ)‖₁ <= ‖m(χ)‖₃ · tail_sum(N)`` for every converged sample point."""
    tail = tail_sum(N)
    values = m_sample.values[m_sample.converged]
    if m_sample.kind == "hyperbolic":
        values = values[:, 0, :]
    if N > m_sample.n_modes:
        raise DomainError(f"N = {N} exceeds the {m_sample.n_modes} sampled modes")
    high = np.array(values)
    high[:, :N] = 0.0
    lhs = np.sqrt(hs_norm_sq_coeffs(high, 1))
    rhs = np.sqrt(hs_norm_sq_coeffs(values, 3)) * tail
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0.0, lhs / rhs, np.where(lhs > 0.0, np.inf, 0.0))
    max_ratio = float(np.max(ratio)) if ratio.size else 0.0
    return TailAudit(n=N, tail=tail, n_checked=int(ratio.size), max_ratio=max_ratio, passed=max_ratio <= 1.0)
