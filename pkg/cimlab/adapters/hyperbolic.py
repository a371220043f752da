"""Galerkin integration of ``eps·u_tt + u_t - Δu + u³ - u = f``.

Per mode the linear block ``(u, v)' = L (u, v)`` with
``L = [[0, 1], [-λ/eps, -1/eps]]`` is propagated exactly.  With roots
``r1, r2`` of ``eps·r² + r + λ = 0``, mean ``m = -1/(2 eps)``::

    e^{Lh} = ½(e^{r1 h} + e^{r2 h}) I + (e^{r1 h} - e^{r2 h})/(r1 - r2) · (L - m I)

The reaction ``N = f - u³ + u`` enters the velocity equation as ``N/eps`` and
is held constant over the step (exponential Euler), which keeps the step
stable however stiff the linear block is.

State arrays have a position/velocity axis just before the mode axis, so a
single state is ``(2, n_modes)`` and a batch is ``(B, 2, n_modes)``.  The
decomposed flow adds a ``v``/``w`` axis in front of that.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from cimlab.errors import DomainError, IntegrationError
from cimlab.middleware.logging import log_error, log_warning
from cimlab.models.flows import AuditReport, DecomposedTrajectory, HyperbolicConfig, HyperbolicTrajectory
from cimlab.models.spectral import ProductState, SpectralField

from .parabolic import DEFAULT_SLACK, _report, _substeps, march
from .spectral import cubic_coeffs, eigenvalues, hs_norm_sq_coeffs, l4_norm4_coeffs, reaction_coeffs, xeps_norm_sq_coeffs

# |r1 - r2|·h below this switches the divided difference to its series
_SERIES_CUTOFF = 1e-4

Propagator = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _roots(lam: np.ndarray, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    s = np.sqrt((1.0 - 4.0 * eps * lam).astype(complex))
    r_slow = -2.0 * lam / (1.0 + s)
    r_fast = (-1.0 - s) / (2.0 * eps)
    return r_slow, r_fast


@lru_cache(maxsize=512)
def _propagator(n_modes: int, eps: float, h: float) -> Propagator:
    """Entries of ``e^{Lh}`` and the exponential-Euler weights for ``N``."""
    lam = eigenvalues(n_modes)
    r1, r2 = _roots(lam, eps)
    e1, e2 = np.exp(r1 * h), np.exp(r2 * h)
    diff = r1 - r2
    mean = -0.5 / eps
    a = 0.5 * (e1 + e2)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.where(
            np.abs(diff) * h < _SERIES_CUTOFF,
            h * np.exp(mean * h) * (1.0 + (0.5 * diff * h) ** 2 / 6.0),
            (e1 - e2) / diff,
        )
    a, b = a.real, b.real
    e11 = a + b / (2.0 * eps)
    e12 = b
    e21 = -b * lam / eps
    e22 = a - b / (2.0 * eps)
    # L^{-1}(e^{Lh} - I) applied to (0, N/eps)
    pu = (eps * (1.0 - e22) - e12) / (eps * lam)
    pv = e12 / eps
    out = (e11, e12, e21, e22, pu, pv)
    for arr in out:
        arr.setflags(write=False)
    return out


def linear_propagator(n_modes: int, eps: float, h: float) -> np.ndarray:
    """``(n_modes, 2, 2)`` stack of the exact per-mode matrices ``e^{Lh}``."""
    e11, e12, e21, e22, _, _ = _propagator(n_modes, eps, h)
    return np.stack([np.stack([e11, e12], axis=-1), np.stack([e21, e22], axis=-1)], axis=-2)


def _advance(x: np.ndarray, forcing: np.ndarray, prop: Propagator) -> np.ndarray:
    e11, e12, e21, e22, pu, pv = prop
    u, v = x[..., 0, :], x[..., 1, :]
    out = np.empty_like(x)
    out[..., 0, :] = e11 * u + e12 * v + pu * forcing
    out[..., 1, :] = e21 * u + e22 * v + pv * forcing
    return out


def step_product(x: np.ndarray, cfg: HyperbolicConfig, h: Optional[float] = None) -> np.ndarray:
    """One step on a state array ``(..., 2, n_modes)``."""
    prop = _propagator(cfg.n_modes, cfg.eps, cfg.effective_dt if h is None else h)
    forcing = reaction_coeffs(x[..., 0, :], cfg.f.coeffs, cfg.nonlinearity, cfg.cutoff)
    return _advance(x, forcing, prop)


def _split_forcing(v_pos: np.ndarray, u_pos: np.ndarray, cfg: HyperbolicConfig) -> Tuple[np.ndarray, np.ndarray]:
    total = reaction_coeffs(u_pos, cfg.f.coeffs, cfg.nonlinearity, cfg.cutoff)
    if cfg.nonlinearity == "full":
        v_src = -cubic_coeffs(v_pos)
    else:
        v_src = np.zeros_like(v_pos)
    # the w source is f + v³ - g(v + w); the two sources add up to the full reaction
    return v_src, total - v_src


def step_decomposed(x: np.ndarray, cfg: HyperbolicConfig, h: Optional[float] = None) -> np.ndarray:
    """One step on a decomposed array ``(..., 2[v/w], 2, n_modes)``."""
    prop = _propagator(cfg.n_modes, cfg.eps, cfg.effective_dt if h is None else h)
    v, w = x[..., 0, :, :], x[..., 1, :, :]
    v_src, w_src = _split_forcing(v[..., 0, :], v[..., 0, :] + w[..., 0, :], cfg)
    return np.stack([_advance(v, v_src, prop), _advance(w, w_src, prop)], axis=-3)


def _check_state(state: ProductState, cfg: HyperbolicConfig) -> None:
    if state.n_modes != cfg.n_modes:
        raise DomainError(f"state has {state.n_modes} modes, config has {cfg.n_modes}")


def step_hyperbolic(state: ProductState, cfg: HyperbolicConfig) -> ProductState:
    """Advance ``(u, u_t)`` by one step of ``cfg.effective_dt``."""
    _check_state(state, cfg)
    out = step_product(state.stacked(), cfg)
    return ProductState.from_arrays(out[0], out[1])


def flow_product(x: np.ndarray, sample_times: Sequence[float], cfg: HyperbolicConfig) -> np.ndarray:
    """Batched ``S_eps(t)`` at every sample time."""
    return march(x, sample_times, lambda y, h: step_product(y, cfg, h), cfg.effective_dt)


def flow_decomposed(x: np.ndarray, sample_times: Sequence[float], cfg: HyperbolicConfig) -> np.ndarray:
    """Batched ``(v, w)`` from ``v(0) = x``, ``w(0) = 0``, shape ``(T, ..., 2, 2, n_modes)``."""
    start = np.stack([np.asarray(x, dtype=float), np.zeros_like(x, dtype=float)], axis=-3)
    return march(start, sample_times, lambda y, h: step_decomposed(y, cfg, h), cfg.effective_dt)


def flow_compact_part(x: np.ndarray, sample_times: Sequence[float], cfg: HyperbolicConfig) -> np.ndarray:
    """Batched ``K_eps(t) x``: the ``w`` component started from ``(x, 0)``."""
    return flow_decomposed(x, sample_times, cfg)[..., 1, :, :]


def _grid(T: float, dt: float) -> Tuple[np.ndarray, float]:
    if T < 0.0:
        raise DomainError(f"T must be nonnegative, got {T}")
    n = 0 if T == 0.0 else _substeps(T, dt)
    return np.linspace(0.0, T, n + 1), (T / n if n else dt)


def _run(start: np.ndarray, T: float, cfg: HyperbolicConfig, stepper) -> Tuple[np.ndarray, np.ndarray]:
    times, h = _grid(T, cfg.effective_dt)
    out = np.empty((times.size,) + start.shape)
    out[0] = start
    current = start
    for i in range(1, times.size):
        current = stepper(current, cfg, h)
        if not np.all(np.isfinite(current)):
            log_error("integration_blowup", time=float(times[i]), eps=cfg.eps)
            raise IntegrationError("non-finite state", float(times[i]))
        out[i] = current
    return times, out


def hyperbolic_energy_coeffs(u: np.ndarray, v: np.ndarray, f_coeffs: np.ndarray, eps: float) -> np.ndarray:
    return (
        eps * hs_norm_sq_coeffs(v, 0)
        + hs_norm_sq_coeffs(u, 1)
        + 0.5 * l4_norm4_coeffs(u)
        - hs_norm_sq_coeffs(u, 0)
        - 2.0 * np.sum(f_coeffs * u, axis=-1)
    )


def hyperbolic_energy(state: ProductState, f: SpectralField, eps: float) -> float:
    """eps‖u_t‖² + ‖∇u‖² + ½|u|₄⁴ - ‖u‖² - 2⟨f, u⟩."""
    return float(hyperbolic_energy_coeffs(state.u.coeffs, state.v.coeffs, f.coeffs, eps))


def n3_coeffs(u: np.ndarray, v: np.ndarray, eps: float) -> np.ndarray:
    lam = eigenvalues(np.shape(u)[-1])
    lam2 = lam * lam
    return np.sum(
        eps * lam2 * v * v + eps * lam2 * u * v + 0.5 * lam2 * u * u + lam2 * lam * u * u,
        axis=-1,
    )


def norm_N3(state: ProductState, eps: float) -> float:
    """eps‖Δw_t‖² + eps⟨Δw_t, Δw⟩ + ½‖Δw‖² + ‖∇Δw‖²."""
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    return float(n3_coeffs(state.u.coeffs, state.v.coeffs, eps))


def evolve_hyperbolic(state0: ProductState, T: float, cfg: HyperbolicConfig) -> HyperbolicTrajectory:
    """Trajectory of ``S_eps`` on a uniform grid with step at most ``cfg.effective_dt``."""
    _check_state(state0, cfg)
    times, out = _run(state0.stacked(), T, cfg, step_product)
    u, v = out[:, 0, :], out[:, 1, :]
    return HyperbolicTrajectory(
        times=times,
        eps=cfg.eps,
        u=u,
        v=v,
        xeps1=np.sqrt(xeps_norm_sq_coeffs(u, v, 1, cfg.eps)),
        xeps2=np.sqrt(xeps_norm_sq_coeffs(u, v, 2, cfg.eps)),
        n3=n3_coeffs(u, v, cfg.eps),
        energy=hyperbolic_energy_coeffs(u, v, cfg.f.coeffs, cfg.eps),
    )


def evolve_decomposed(state0: ProductState, T: float, cfg: HyperbolicConfig) -> DecomposedTrajectory:
    """Co-integrate ``v`` (from ``state0``, no forcing) and ``w`` (from 0) on one grid."""
    _check_state(state0, cfg)
    start = np.stack([state0.stacked(), np.zeros((2, cfg.n_modes))])
    times, out = _run(start, T, cfg, step_decomposed)
    return DecomposedTrajectory(times=times, eps=cfg.eps, v=out[:, 0], w=out[:, 1])


def calibrate_C3(decomposed: DecomposedTrajectory, eps: Optional[float] = None) -> float:
    """Runtime ``C3``: sup of ``N3(w, w_t)/5`` over the second half of the run."""
    weight = decomposed.eps if eps is None else eps
    half = decomposed.size // 2
    w = decomposed.w[half:]
    return float(np.max(n3_coeffs(w[:, 0], w[:, 1], weight))) / 5.0


def entry_time_hyperbolic(N3_at_0: float, rho: float, C3: float) -> float:
    """``5·ln(2(N3(0) - 5C3)/(rho² - 10C3))``, or 0 when already absorbed."""
    denominator = rho * rho - 10.0 * C3
    if not denominator > 0.0:
        raise DomainError(f"rho² = {rho * rho} must exceed 10·C3 = {10.0 * C3}")
    if N3_at_0 <= 5.0 * C3:
        return 0.0
    arg = 2.0 * (N3_at_0 - 5.0 * C3) / denominator
    if arg <= 1.0:
        return 0.0
    return 5.0 * math.log(arg)


def check_energy_decay(traj: HyperbolicTrajectory, slack: float = DEFAULT_SLACK) -> AuditReport:
    """Damped energy nonincreasing up to ``slack`` per step."""
    if traj.size < 2:
        return AuditReport(name="energy_decay", passed=True, max_violation=0.0, slack=slack, n_checked=0)
    rise = np.diff(traj.energy)
    return _report("energy_decay", traj.times[1:], rise, np.zeros_like(rise), slack)


def check_decomposition(decomposed: DecomposedTrajectory, full: HyperbolicTrajectory, tol: float = 1e-9) -> AuditReport:
    """``v + w`` against an undecomposed run on the same grid."""
    if decomposed.size != full.size:
        raise DomainError("trajectories must share a time grid")
    u = decomposed.u
    gap = np.maximum(np.max(np.abs(u[:, 0] - full.u), axis=-1), np.max(np.abs(u[:, 1] - full.v), axis=-1))
    report = _report("decomposition", full.times, gap, np.zeros_like(gap), tol)
    if not report.passed:
        log_warning("decomposition_drift", max_gap=report.max_violation)
    return report
