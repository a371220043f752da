"""Sampled inertial manifolds and compact manifold clouds.

The graph ``m`` over a finite low-mode grid is found by re-anchored
relaxation: flow ``ξ + q`` for ``T_relax``, keep the high modes as the new
``q`` and put the low modes back to ``ξ``.  The high modes contract at the
rate set by the spectral gap, so a handful of passes usually suffices.

Clouds follow the windowed construction: each point of the graph cloud
``C_0`` is followed by the compact part ``K`` through three consecutive
windows ``[c_j, c_j + t_horizon]`` on one trajectory, the last window is kept,
and the result is swept by the full semiflow over ``τ`` in ``[τ_3, 2τ_3]``.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.stats import linregress

from cimlab.errors import DomainError
from cimlab.middleware.logging import log_info, log_warning
from cimlab.models.flows import HyperbolicConfig, ParabolicConfig
from cimlab.models.gap import GapCertificate
from cimlab.models.manifold import (
    AttractionReport,
    FlowKind,
    GraphSample,
    ManifoldAudit,
    ManifoldCloud,
    ManifoldSettings,
    WindowTimes,
)

from .distance import distance_to_cloud, scaled_coordinates, semidist
from .hyperbolic import flow_decomposed, flow_product
from .parabolic import flow_coeffs
from .spectral import hs_norm_sq_coeffs, xeps_norm_sq_coeffs

FlowConfig = Union[ParabolicConfig, HyperbolicConfig]
BatchFlow = Callable[[np.ndarray, list], np.ndarray]


# ---------------------------------------------------------------------------
# Low-mode grids
# ---------------------------------------------------------------------------
def low_mode_grid(
    n_low: int,
    extent: float = 1.5,
    points_per_axis: int = 3,
    cap: int = 729,
    seed: int = 0,
) -> np.ndarray:
    """Uniform grid on ``[-extent, extent]^{n_low}``, subsampled to ``cap`` points.

    The subsample is drawn without replacement from the full product grid
    with a seeded generator and kept in lexicographic order.
    """
    if n_low < 1:
        raise DomainError(f"n_low must be positive, got {n_low}")
    axis = np.linspace(-extent, extent, points_per_axis) if points_per_axis > 1 else np.zeros(1)
    total = points_per_axis**n_low
    if total <= cap:
        index = np.arange(total)
    else:
        rng = np.random.default_rng(seed)
        index = np.sort(rng.choice(total, size=cap, replace=False))
    digits = np.array(np.unravel_index(index, (points_per_axis,) * n_low)).T
    return axis[digits]


def product_grid(W: np.ndarray, cap: int = 729, seed: int = 0) -> np.ndarray:
    """Pairs ``(χ, ψ)`` from ``W × W`` as ``(M, 2, n_low)``, capped like :func:`low_mode_grid`."""
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    total = m * m
    if total <= cap:
        index = np.arange(total)
    else:
        rng = np.random.default_rng(seed)
        index = np.sort(rng.choice(total, size=cap, replace=False))
    first, second = np.divmod(index, m)
    return np.stack([W[first], W[second]], axis=1)


# ---------------------------------------------------------------------------
# Flow plumbing
# ---------------------------------------------------------------------------
def _semiflow(kind: FlowKind, cfg: FlowConfig) -> BatchFlow:
    if kind == "parabolic":
        return lambda x, times: flow_coeffs(x, times, cfg)
    return lambda x, times: flow_product(x, times, cfg)


def _check_kind(kind: FlowKind, cfg: FlowConfig) -> None:
    expected = ParabolicConfig if kind == "parabolic" else HyperbolicConfig
    if not isinstance(cfg, expected):
        raise DomainError(f"{kind} flow needs a {expected.__name__}")


def _norm_sq(kind: FlowKind, x: np.ndarray, k: int, eps: float) -> np.ndarray:
    if kind == "parabolic":
        return hs_norm_sq_coeffs(x, k)
    return xeps_norm_sq_coeffs(x[..., 0, :], x[..., 1, :], k, eps)


# ---------------------------------------------------------------------------
# Graph fit
# ---------------------------------------------------------------------------
def _fit_graph(
    kind: FlowKind,
    xi: np.ndarray,
    settings: ManifoldSettings,
    cfg: FlowConfig,
    eps: Optional[float],
) -> GraphSample:
    xi = np.asarray(xi, dtype=float)
    n_low = xi.shape[-1]
    if xi.shape[0] == 0:
        raise DomainError("the low-mode grid is empty")
    if n_low > cfg.n_modes:
        raise DomainError(f"grid has {n_low} low modes, flow only {cfg.n_modes}")
    flow = _semiflow(kind, cfg)
    weight = 0.0 if eps is None else eps

    anchor = np.zeros(xi.shape[:-1] + (cfg.n_modes,))
    anchor[..., :n_low] = xi
    q = np.zeros_like(anchor)
    m = xi.shape[0]
    converged = np.zeros(m, dtype=bool)
    residual = np.full(m, np.inf)
    iterations = np.zeros(m, dtype=int)
    active = np.arange(m)

    for it in range(1, settings.max_iter + 1):
        image = flow(anchor[active] + q[active], [settings.T_relax])[0]
        image[..., :n_low] = 0.0
        step = np.sqrt(_norm_sq(kind, image - q[active], 1, weight))
        q[active] = image
        residual[active] = step
        iterations[active] = it
        done = step < settings.tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break

    if active.size:
        log_warning("graph_point_unconverged", kind=kind, count=int(active.size), max_iter=settings.max_iter)
    log_info("graph_fit_done", kind=kind, points=m, converged=int(converged.sum()), n_low=n_low)
    return GraphSample(
        kind=kind,
        n_low=n_low,
        eps=eps,
        tol=settings.tol,
        xi=xi,
        values=q,
        converged=converged,
        residual=residual,
        iterations=iterations,
    )


def fit_graph_parabolic(
    xi_grid: np.ndarray, cfg: ParabolicConfig, settings: Optional[ManifoldSettings] = None
) -> GraphSample:
    """Graph of the parabolic manifold over ``xi_grid`` (shape ``(M, n_low)``)."""
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 2:
        raise DomainError("parabolic grid points are low-mode vectors")
    return _fit_graph("parabolic", xi, settings or ManifoldSettings(), cfg, None)


def fit_graph_hyperbolic(
    xi_grid_product: np.ndarray, cfg: HyperbolicConfig, settings: Optional[ManifoldSettings] = None
) -> GraphSample:
    """Graph of the hyperbolic manifold over pairs ``(χ, ψ)`` (shape ``(M, 2, n_low)``)."""
    xi = np.asarray(xi_grid_product, dtype=float)
    if xi.ndim != 3 or xi.shape[1] != 2:
        raise DomainError("hyperbolic grid points are (position, velocity) pairs")
    return _fit_graph("hyperbolic", xi, settings or ManifoldSettings(), cfg, cfg.eps)


# ---------------------------------------------------------------------------
# Clouds
# ---------------------------------------------------------------------------
def _window_trajectory(
    which: FlowKind, cfg: FlowConfig, compact_map: str, start: np.ndarray, times: np.ndarray
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """States of ``K`` along one continuous trajectory, plus the ``v`` part when decomposed."""
    if which == "parabolic" or compact_map == "semiflow":
        return _semiflow(which, cfg)(start, list(times)), None
    both = flow_decomposed(start, list(times), cfg)
    return both[..., 1, :, :], both[..., 0, :, :]


def build_omega_K(
    graph: GraphSample,
    windows: WindowTimes,
    which: FlowKind,
    cfg: FlowConfig,
    compact_map: str = "decomposed",
    residual_tol: float = 1e-6,
) -> ManifoldCloud:
    """Last-window sample of ``K(t)`` along one trajectory per converged graph point.

    Each stage continues from the end of the previous window, so ``w`` is
    carried forward and the decaying part ``v`` keeps decaying across all
    three windows.  Points are ordered time-major; ``tau`` is 0 and ``t`` the
    absolute trajectory time.
    """
    _check_kind(which, cfg)
    if compact_map not in ("decomposed", "semiflow"):
        raise DomainError(f"unknown compact map {compact_map!r}")
    if graph.kind != which:
        raise DomainError(f"graph is {graph.kind}, requested {which}")
    skipped = int(graph.size - graph.converged.sum())
    if skipped:
        log_warning("graph_points_skipped", count=skipped)
    start = graph.points()
    if start.shape[0] == 0:
        raise DomainError("no converged graph points to build from")

    stages = windows.stage_samples()
    traj, decaying = _window_trajectory(which, cfg, compact_map, start, np.concatenate(stages))
    eps = graph.eps or 0.0
    size = windows.t_grid_size
    for j, samples in enumerate(stages):
        block = traj[j * size : (j + 1) * size]
        spread = float(np.sqrt(np.max(_norm_sq(which, block, 1, eps))))
        log_info("omega_stage", kind=which, stage=j, t_start=float(samples[0]), sup_norm=spread)
    if decaying is not None:
        residual = float(np.sqrt(np.max(_norm_sq(which, decaying[-size:], 1, eps))))
        if residual > residual_tol:
            log_warning("decaying_part_above_tol", residual=residual, tol=residual_tol, t_start=float(stages[-1][0]))
    points = traj[-size:].reshape((-1,) + start.shape[1:])
    t = np.repeat(stages[-1], start.shape[0])
    log_info("omega_cloud_built", kind=which, points=int(points.shape[0]), skipped=skipped)
    return ManifoldCloud(kind=which, eps=graph.eps, points=points, tau=np.zeros_like(t), t=t)


def build_compact_manifold(
    omega_cloud: ManifoldCloud, windows: WindowTimes, which: FlowKind, cfg: FlowConfig
) -> ManifoldCloud:
    """Union over ``τ`` in ``I3_grid`` of ``S(τ)`` applied to the cloud."""
    _check_kind(which, cfg)
    if not windows.I3_grid:
        raise DomainError("I3_grid is empty")
    taus = sorted(windows.I3_grid)
    traj = _semiflow(which, cfg)(np.array(omega_cloud.points), taus)
    points = traj.reshape((-1,) + omega_cloud.points.shape[1:])
    tau = np.repeat(np.asarray(taus), omega_cloud.size)
    t = np.tile(omega_cloud.t, len(taus))
    log_info("compact_manifold_built", kind=which, points=int(points.shape[0]), taus=len(taus))
    return ManifoldCloud(kind=which, eps=omega_cloud.eps, points=points, tau=tau, t=t)


def apply_compatibility(
    cert: GapCertificate, parabolic_windows: WindowTimes, hyperbolic_windows: WindowTimes
) -> WindowTimes:
    """Shared windows: componentwise maxima, ``N* = max(N_p*, N_eps*)``."""
    p, h = parabolic_windows, hyperbolic_windows
    c = tuple(max(a, b) for a, b in zip(p.c, h.c))
    tau3 = max(p.tau3, h.tau3)
    if h.tau3 > p.tau3 or (h.tau3 == p.tau3 and len(h.I3_grid) > len(p.I3_grid)):
        grid = h.I3_grid
    else:
        grid = p.I3_grid
    candidates = [cert.n_star_parabolic]
    if cert.n_star_hyperbolic is not None:
        candidates.append(cert.n_star_hyperbolic)
    candidates += [w.n_star for w in (p, h) if w.n_star is not None]
    return WindowTimes(
        c=c,
        tau3=tau3,
        I3_grid=grid,
        t_horizon=max(p.t_horizon, h.t_horizon),
        t_grid_size=max(p.t_grid_size, h.t_grid_size),
        n_star=max(candidates),
    )


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------
def audit_lipschitz(graph: GraphSample, bound: float, slack: float = 0.0) -> ManifoldAudit:
    """Largest ``‖m(ξ) - m(ξ')‖/‖ξ - ξ'‖`` over nearest grid neighbours, in ``H_1``/``X^eps_1``."""
    keep = graph.converged
    xi = graph.xi[keep]
    values = graph.values[keep]
    if xi.shape[0] < 2:
        return ManifoldAudit(name="lipschitz", value=0.0, bound=bound + slack, passed=True, n_checked=0)
    eps = graph.eps or 0.0
    full_xi = np.zeros(values.shape)
    full_xi[..., : graph.n_low] = xi
    sx = scaled_coordinates(full_xi, 1, eps)
    sv = scaled_coordinates(values, 1, eps)
    worst = 0.0
    for i in range(sx.shape[0]):
        d = np.sqrt(np.sum((sx - sx[i]) ** 2, axis=1))
        d[i] = np.inf
        j = int(np.argmin(d))
        if d[j] > 0.0:
            worst = max(worst, float(np.sqrt(np.sum((sv[j] - sv[i]) ** 2)) / d[j]))
    passed = worst <= bound + slack
    if not passed:
        log_warning("audit_violation", audit="lipschitz", value=worst, bound=bound)
    return ManifoldAudit(name="lipschitz", value=worst, bound=bound + slack, passed=passed, n_checked=int(sx.shape[0]))


def audit_positive_invariance(
    cloud: ManifoldCloud, cfg: FlowConfig, sigma: float = 0.1, tol: float = 1e-2, k: int = 1
) -> ManifoldAudit:
    """Semidistance from ``S(σ)·cloud`` back to the cloud."""
    _check_kind(cloud.kind, cfg)
    moved = _semiflow(cloud.kind, cfg)(np.array(cloud.points), [sigma])[0]
    eps = cloud.eps or 0.0
    image = ManifoldCloud(kind=cloud.kind, eps=cloud.eps, points=moved, tau=cloud.tau + sigma, t=cloud.t)
    value = semidist(image, cloud, k, eps)
    return ManifoldAudit(
        name="positive_invariance",
        value=value,
        bound=tol,
        passed=value <= tol,
        n_checked=cloud.size,
        detail=f"sigma={sigma!r}",
    )


def audit_exponential_attraction(
    cloud: ManifoldCloud, initial: np.ndarray, times: list[float], cfg: FlowConfig, k: int = 1
) -> AttractionReport:
    """Worst distance from ``S(t)x`` to the cloud, with an exponential rate fitted in ``t``."""
    _check_kind(cloud.kind, cfg)
    traj = _semiflow(cloud.kind, cfg)(np.asarray(initial, dtype=float), times)
    eps = cloud.eps or 0.0
    worst = np.array([float(np.max(distance_to_cloud(traj[i], cloud, k, eps))) for i in range(len(times))])
    positive = worst > 0.0
    if positive.sum() >= 2:
        rate = -float(linregress(np.asarray(times)[positive], np.log(worst[positive])).slope)
    else:
        rate = math.inf
    return AttractionReport(times=list(times), distances=worst.tolist(), rate=rate, passed=rate > 0.0)
