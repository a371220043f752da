"""Galerkin integration of ``p_t - Δp + p³ - p = f`` and its audits.

Each step is exponential Euler with the exact diagonal propagator of the
Laplacian::

    c_n ← e^{-λ_n h} c_n + (1 - e^{-λ_n h})/λ_n · N_n(c),   N = f - u³ + u

The kernels accept arrays whose last axis is the mode axis, so a whole grid of
initial data advances in one call.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from cimlab.errors import DomainError, IntegrationError
from cimlab.middleware.logging import log_error, log_warning
from cimlab.models.flows import AuditReport, ParabolicConfig, TrajectoryRecord
from cimlab.models.spectral import SpectralField

from .spectral import eigenvalues, hs_norm_sq_coeffs, l4_norm4_coeffs, reaction_coeffs

DEFAULT_SLACK = 1e-6

StepFn = Callable[[np.ndarray, float], np.ndarray]


@lru_cache(maxsize=512)
def _etd_coeffs(n_modes: int, h: float) -> Tuple[np.ndarray, np.ndarray]:
    lam = eigenvalues(n_modes)
    decay = np.exp(-lam * h)
    phi = -np.expm1(-lam * h) / lam
    decay.setflags(write=False)
    phi.setflags(write=False)
    return decay, phi


def step_coeffs(coeffs: np.ndarray, cfg: ParabolicConfig, h: Optional[float] = None) -> np.ndarray:
    """One exponential-Euler step of size ``h`` (default ``cfg.dt``)."""
    decay, phi = _etd_coeffs(cfg.n_modes, cfg.dt if h is None else h)
    rhs = reaction_coeffs(coeffs, cfg.f.coeffs, cfg.nonlinearity, cfg.cutoff)
    return decay * coeffs + phi * rhs


def _check_modes(field: SpectralField, cfg: ParabolicConfig) -> None:
    if field.n_modes != cfg.n_modes:
        raise DomainError(f"state has {field.n_modes} modes, config has {cfg.n_modes}")


def step(u: SpectralField, cfg: ParabolicConfig) -> SpectralField:
    """Advance ``u`` by one time step ``cfg.dt``."""
    _check_modes(u, cfg)
    return SpectralField(coeffs=step_coeffs(u.coeffs, cfg))


def _substeps(span: float, dt: float) -> int:
    return max(1, math.ceil(span / dt - 1e-9))


def march(state: np.ndarray, sample_times: Sequence[float], step_fn: StepFn, dt: float) -> np.ndarray:
    """Integrate from ``t = 0`` and return the state at each sample time.

    ``sample_times`` must be nondecreasing and nonnegative.  Each gap between
    samples is covered by equal substeps no longer than ``dt``.  The result
    has shape ``(len(sample_times),) + state.shape``.
    """
    times = np.asarray(sample_times, dtype=float)
    if times.size and (times[0] < 0.0 or np.any(np.diff(times) < 0.0)):
        raise DomainError("sample times must be nonnegative and nondecreasing")
    out = np.empty((times.size,) + state.shape)
    current = np.array(state, dtype=float)
    t = 0.0
    for k, target in enumerate(times):
        span = target - t
        if span > 0.0:
            n = _substeps(span, dt)
            h = span / n
            for i in range(n):
                current = step_fn(current, h)
                if not np.all(np.isfinite(current)):
                    fail_at = t + (i + 1) * h
                    log_error("integration_blowup", time=fail_at)
                    raise IntegrationError("non-finite state", fail_at)
            t = float(target)
        out[k] = current
    return out


def flow_coeffs(coeffs: np.ndarray, sample_times: Sequence[float], cfg: ParabolicConfig) -> np.ndarray:
    """Batched ``S_p(t)`` evaluated at every sample time."""
    return march(coeffs, sample_times, lambda c, h: step_coeffs(c, cfg, h), cfg.dt)


def lyapunov_coeffs(coeffs: np.ndarray, f_coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    return (
        hs_norm_sq_coeffs(coeffs, 1)
        + 0.5 * l4_norm4_coeffs(coeffs)
        - hs_norm_sq_coeffs(coeffs, 0)
        - 2.0 * np.sum(f_coeffs * coeffs, axis=-1)
    )


def lyapunov(u: SpectralField, f: SpectralField) -> float:
    """‖∇u‖² + ½|u|₄⁴ - ‖u‖² - 2⟨f, u⟩, nonincreasing along the flow."""
    return float(lyapunov_coeffs(u.coeffs, f.coeffs))


def evolve(u0: SpectralField, T: float, cfg: ParabolicConfig) -> TrajectoryRecord:
    """Trajectory of ``S_p`` on the uniform grid ``0, h, ..., T`` with ``h <= dt``."""
    _check_modes(u0, cfg)
    if T < 0.0:
        raise DomainError(f"T must be nonnegative, got {T}")
    n = 0 if T == 0.0 else _substeps(T, cfg.dt)
    times = np.linspace(0.0, T, n + 1)
    coeffs = np.empty((n + 1, cfg.n_modes))
    coeffs[0] = u0.coeffs
    h = T / n if n else cfg.dt
    current = np.array(u0.coeffs)
    for i in range(1, n + 1):
        current = step_coeffs(current, cfg, h)
        if not np.all(np.isfinite(current)):
            log_error("integration_blowup", time=float(times[i]))
            raise IntegrationError("non-finite state", float(times[i]))
        coeffs[i] = current
    return TrajectoryRecord(
        times=times,
        coeffs=coeffs,
        l2=np.sqrt(hs_norm_sq_coeffs(coeffs, 0)),
        h1=np.sqrt(hs_norm_sq_coeffs(coeffs, 1)),
        lyapunov=lyapunov_coeffs(coeffs, cfg.f.coeffs),
    )


def extension_E(u: SpectralField, f: SpectralField) -> SpectralField:
    """``f + Δu - u³ + u``: the velocity a parabolic solution has at ``u``."""
    return SpectralField(coeffs=extension_coeffs(u.coeffs, f.coeffs))


def extension_coeffs(coeffs: np.ndarray, f_coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    return reaction_coeffs(coeffs, f_coeffs) - eigenvalues(coeffs.shape[-1]) * coeffs


def entry_time_parabolic(
    u0_h3_norm: float, rho: float, C: float, c: float, already_inside: bool = False
) -> float:
    """Time after which the smoothed set sits in the ball of radius ``rho``.

    ``(1/c)·ln((‖u0‖₃² - 1)/(rho² - C/c))`` clipped at 0; 0 as well when the
    caller reports the set is already inside.
    """
    if not c > 0.0:
        raise DomainError(f"rate c must be positive, got {c}")
    floor = C / c
    if not rho * rho > floor:
        raise DomainError(f"rho² = {rho * rho} must exceed C/c = {floor}")
    if already_inside:
        return 0.0
    numerator = u0_h3_norm * u0_h3_norm - 1.0
    denominator = rho * rho - floor
    if numerator <= denominator:
        return 0.0
    return max(0.0, math.log(numerator / denominator) / c)


def parabolic_window_starts() -> Tuple[float, float, float]:
    """Window starts ``(c_0, c_1, c_2)`` with ``c_j = ln(j + 2)``."""
    return (math.log(2.0), math.log(3.0), math.log(4.0))


# ---------------------------------------------------------------------------
# Audits
# ---------------------------------------------------------------------------
def _report(
    name: str,
    times: np.ndarray,
    lhs: np.ndarray,
    rhs: np.ndarray,
    slack: float,
    detail: str = "",
) -> AuditReport:
    excess = lhs - rhs
    if excess.size == 0:
        return AuditReport(name=name, passed=True, max_violation=0.0, slack=slack, n_checked=0, detail=detail)
    bad = np.nonzero(excess > slack)[0]
    first = float(times[bad[0]]) if bad.size else None
    report = AuditReport(
        name=name,
        passed=bad.size == 0,
        max_violation=float(np.max(excess)),
        slack=slack,
        n_checked=int(excess.size),
        first_violation_time=first,
        detail=detail,
    )
    if not report.passed:
        log_warning("audit_violation", audit=name, max_violation=report.max_violation, time=first)
    return report


def check_L2_decay(
    record: TrajectoryRecord, u0: SpectralField, f: SpectralField, slack: float = DEFAULT_SLACK
) -> AuditReport:
    """‖p(t)‖² <= e^{-2t}‖p0‖² + ½(‖f‖² + 9π/8)(1 - e^{-2t}) at every recorded time."""
    t = record.times
    decay = np.exp(-2.0 * t)
    p0 = float(np.dot(u0.coeffs, u0.coeffs))
    ff = float(np.dot(f.coeffs, f.coeffs))
    bound = decay * p0 + 0.5 * (ff + 9.0 * math.pi / 8.0) * (1.0 - decay)
    return _report("l2_decay", t, record.l2**2, bound, slack)


def check_H1_decay(
    record: TrajectoryRecord, u0: SpectralField, f: SpectralField, slack: float = DEFAULT_SLACK
) -> AuditReport:
    """‖p‖² + ‖∇p‖² <= e^{-t/2}(‖p0‖² + ‖∇p0‖²) + (4‖f‖² + 9π/4)(1 - e^{-t/2})."""
    t = record.times
    decay = np.exp(-0.5 * t)
    y0 = float(hs_norm_sq_coeffs(u0.coeffs, 0) + hs_norm_sq_coeffs(u0.coeffs, 1))
    ff = float(np.dot(f.coeffs, f.coeffs))
    bound = decay * y0 + (4.0 * ff + 9.0 * math.pi / 4.0) * (1.0 - decay)
    return _report("h1_decay", t, record.l2**2 + record.h1**2, bound, slack)


def h1_absorbing_constant(u0: SpectralField, f: SpectralField) -> float:
    """C = 2(2‖f‖² + ‖u0‖² + 3√π)."""
    return 2.0 * (2.0 * float(np.dot(f.coeffs, f.coeffs)) + float(np.dot(u0.coeffs, u0.coeffs)) + 3.0 * math.sqrt(math.pi))


def check_H1_absorbing(
    record: TrajectoryRecord, u0: SpectralField, f: SpectralField, slack: float = DEFAULT_SLACK
) -> AuditReport:
    """‖u(t)‖₁² <= 2C for all recorded t >= ln 2."""
    mask = record.times >= math.log(2.0)
    bound = 2.0 * h1_absorbing_constant(u0, f)
    lhs = record.h1[mask] ** 2
    return _report("h1_absorbing", record.times[mask], lhs, np.full(lhs.shape, bound), slack)


def check_lyapunov(record: TrajectoryRecord, slack: float = DEFAULT_SLACK) -> AuditReport:
    """Lyapunov value nonincreasing, allowing ``slack·h`` growth per step."""
    if record.size < 2:
        return AuditReport(name="lyapunov", passed=True, max_violation=0.0, slack=slack, n_checked=0)
    h = np.diff(record.times)
    rise = np.diff(record.lyapunov)
    # normalize so that the per-step allowance is the fixed slack
    return _report("lyapunov", record.times[1:], rise / h, np.zeros_like(rise), slack)


def audit_all(record: TrajectoryRecord, u0: SpectralField, f: SpectralField, slack: float = DEFAULT_SLACK) -> list[AuditReport]:
    return [
        check_L2_decay(record, u0, f, slack),
        check_H1_decay(record, u0, f, slack),
        check_H1_absorbing(record, u0, f, slack),
        check_lyapunov(record, slack),
    ]
