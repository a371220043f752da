"""Command-line runner.

Subcommands: ``certify``, ``simulate``, ``manifold``, ``robustness`` and
``audit``.  Every command writes CSV files under ``--out`` and prints a short
summary on stdout.  Exit codes: 0 success, 1 audit failure, 2 usage or
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cimlab.adapters.gap import certify
from cimlab.adapters.hyperbolic import (
    check_decomposition,
    check_energy_decay,
    evolve_decomposed,
    evolve_hyperbolic,
    n3_coeffs,
)
from cimlab.adapters.manifold import (
    apply_compatibility,
    audit_lipschitz,
    audit_positive_invariance,
    build_compact_manifold,
    build_omega_K,
    fit_graph_parabolic,
    low_mode_grid,
)
from cimlab.adapters.parabolic import audit_all, evolve, parabolic_window_starts
from cimlab.adapters.robustness import (
    check_tail_bound,
    fit_power_law,
    hyperbolic_config,
    lift,
    run_singular_limit,
    singular_limit_window,
    sweep_eps,
    tail_sum,
)
from cimlab.adapters.spectral import xeps_norm_sq_coeffs
from cimlab.config import ExperimentConfig, load_config
from cimlab.errors import ConfigError, DomainError, IntegrationError, LabError, PipelineError
from cimlab.middleware.logging import log_error, log_warning
from cimlab.models.flows import AuditReport, ParabolicConfig
from cimlab.models.gap import GapCertificate
from cimlab.models.manifold import GraphSample, ManifoldAudit, ManifoldCloud, ManifoldSettings, WindowTimes
from cimlab.models.robustness import SweepRow
from cimlab.models.spectral import ProductState, SpectralField
from cimlab import reporting

EXIT_OK = 0
EXIT_AUDIT = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# Shared setup
# ---------------------------------------------------------------------------
def _out_dir(config: ExperimentConfig) -> Path:
    path = Path(config.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def forcing_field(config: ExperimentConfig, n_modes: Optional[int] = None) -> SpectralField:
    """``f = forcing · w_1``."""
    return SpectralField.basis(1, n_modes or config.n_modes, config.forcing)


def random_data(config: ExperimentConfig, n_modes: Optional[int] = None) -> SpectralField:
    """Seeded random field on modes ``1..data_modes`` with L² norm ``amplitude``."""
    n = n_modes or config.n_modes
    rng = np.random.default_rng(config.seed)
    coeffs = np.zeros(n)
    k = min(config.data_modes, n)
    raw = rng.standard_normal(k) / np.arange(1, k + 1)
    norm = float(np.linalg.norm(raw))
    if norm > 0.0:
        coeffs[:k] = config.amplitude * raw / norm
    return SpectralField(coeffs=coeffs)


def parabolic_config(config: ExperimentConfig, n_modes: Optional[int] = None) -> ParabolicConfig:
    n = n_modes or config.n_modes
    return ParabolicConfig(
        n_modes=n,
        f=forcing_field(config, n),
        dt=config.dt,
        use_modified_nonlinearity=config.use_modified_nonlinearity,
        delta=config.delta,
    )


def manifold_settings(config: ExperimentConfig) -> ManifoldSettings:
    return ManifoldSettings(
        grid_extent=config.grid_extent,
        points_per_axis=config.points_per_axis,
        grid_cap=config.grid_cap,
        T_relax=config.T_relax,
        tol=config.graph_tol,
        max_iter=config.max_iter,
        seed=config.seed,
    )


def shared_windows(config: ExperimentConfig, cert: GapCertificate) -> WindowTimes:
    """Compatible windows for both flows, with ``N*`` overridable from the config."""
    starts = parabolic_window_starts()
    para = WindowTimes.build(starts, config.tau3_parabolic, config.n_tau, config.t_horizon, config.t_grid_size)
    hyper = WindowTimes.build(starts, config.tau3_hyperbolic, config.n_tau, config.t_horizon, config.t_grid_size)
    windows = apply_compatibility(cert, para, hyper)
    if config.n_star is not None:
        windows = windows.model_copy(update={"n_star": config.n_star})
    if windows.n_star > config.n_modes:
        raise ConfigError(f"N* = {windows.n_star} needs more than n_modes = {config.n_modes}")
    return windows


def parabolic_manifold(
    config: ExperimentConfig, windows: WindowTimes
) -> Tuple[GraphSample, ManifoldCloud, ParabolicConfig]:
    cfg = parabolic_config(config)
    settings = manifold_settings(config)
    W = low_mode_grid(windows.n_star, settings.grid_extent, settings.points_per_axis, settings.grid_cap, settings.seed)
    graph = fit_graph_parabolic(W, cfg, settings)
    omega = build_omega_K(graph, windows, "parabolic", cfg)
    return graph, build_compact_manifold(omega, windows, "parabolic", cfg), cfg


def _audit_line(report: AuditReport) -> str:
    status = "PASS" if report.passed else "FAIL"
    return f"  {status} {report.name}: max violation {report.max_violation:.3e} over {report.n_checked} checks"


def _manifold_rows(audits: Sequence[ManifoldAudit]) -> List[list]:
    return [[a.name, a.value, a.bound, a.passed, a.n_checked] for a in audits]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_certify(config: ExperimentConfig) -> int:
    """Gap certificate and margins; succeeds when the parabolic split lies within ``n_max``."""
    cert = certify(config.delta, config.eps, config.n_max, config.tol)
    out = _out_dir(config)
    reporting.write_certificate(out / "certificate.csv", cert)
    reporting.write_margins(out / "margins.csv", cert)
    n_h = cert.n_star_hyperbolic if cert.n_star_hyperbolic is not None else "none"
    print(f"delta={cert.delta!r} ell={cert.ell!r}")
    print(f"N_p*={cert.n_star_parabolic} N_eps*={n_h} (eps={cert.eps!r}, n_max={config.n_max})")
    if cert.eps_s_found:
        print(f"eps_s≈{cert.eps_s_estimate!r}")
    else:
        print("eps_s: no certified eps found")
    if cert.n_star_parabolic > config.n_max:
        print(f"parabolic split N_p*={cert.n_star_parabolic} exceeds n_max={config.n_max}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig) -> int:
    """One trajectory with every applicable inequality audit."""
    out = _out_dir(config)
    u0 = random_data(config)
    pcfg = parabolic_config(config)
    reports: List[AuditReport]
    if config.flow == "parabolic":
        record = evolve(u0, config.T, pcfg)
        reporting.write_trajectory(out / "trajectory.csv", record)
        reports = audit_all(record, u0, pcfg.f, config.slack)
    else:
        hcfg = hyperbolic_config(pcfg, config.eps, auto_halve_dt=True)
        state0 = lift(u0, pcfg.f)
        traj = evolve_hyperbolic(state0, config.T, hcfg)
        reporting.write_hyperbolic_trajectory(out / "trajectory.csv", traj)
        decomposed = evolve_decomposed(state0, config.T, hcfg)
        reporting.write_decomposition(out / "decomposition.csv", decomposed)
        reports = [check_energy_decay(traj, config.slack), check_decomposition(decomposed, traj)]
    reporting.write_audits(out / "audits.csv", reports)
    print(f"{config.flow} run to T={config.T!r} with {config.n_modes} modes")
    for report in reports:
        print(_audit_line(report))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_AUDIT


def cmd_manifold(config: ExperimentConfig) -> int:
    """Parabolic compact-manifold cloud with Lipschitz, invariance and tail audits."""
    cert = certify(config.delta, config.eps, config.n_max, config.tol)
    windows = shared_windows(config, cert)
    graph, cloud, cfg = parabolic_manifold(config, windows)
    out = _out_dir(config)
    reporting.write_cloud(out / "parabolic_cloud.csv", cloud)

    lipschitz = audit_lipschitz(graph, cert.ell)
    invariance = audit_positive_invariance(cloud, cfg, config.invariance_sigma, config.invariance_tol)
    tail = check_tail_bound(graph, windows.n_star)
    tail_audit = ManifoldAudit(
        name="tail_bound", value=tail.max_ratio, bound=1.0, passed=tail.passed, n_checked=tail.n_checked
    )
    audits = [lipschitz, invariance, tail_audit]
    reporting.write_csv(
        out / "manifold_audits.csv", "manifold_audits", ["name", "value", "bound", "passed", "n_checked"], _manifold_rows(audits)
    )
    print(f"N*={windows.n_star} grid={graph.size} converged={int(graph.converged.sum())} cloud={cloud.size}")
    for audit in audits:
        print(f"  {'PASS' if audit.passed else 'NOTE'} {audit.name}: {audit.value:.3e} (bound {audit.bound:.3e})")
    return EXIT_OK if tail.passed else EXIT_AUDIT


def _singular_limit(config: ExperimentConfig, windows: Optional[WindowTimes]) -> list:
    n = config.singular_modes
    base = config.model_copy(update={"n_modes": n, "data_modes": min(config.data_modes, n)})
    pcfg = parabolic_config(base, n)
    u0 = random_data(base, n)
    state0 = lift(u0, pcfg.f)
    if config.velocity_offset:
        offset = SpectralField.basis(1, n, config.velocity_offset)
        state0 = ProductState(u=state0.u, v=state0.v + offset)
    window = singular_limit_window(windows)
    return [run_singular_limit(state0, hyperbolic_config(pcfg, eps, auto_halve_dt=True), window) for eps in config.singular_eps]


def cmd_robustness(config: ExperimentConfig) -> int:
    """eps-sweep of the manifold distance with its power-law fit, plus the singular-limit runs."""
    out = _out_dir(config)
    if config.synthetic_distances is not None:
        fit = fit_power_law(config.eps_list, config.synthetic_distances)
        rows = [SweepRow(eps=e, d_uv=d, d_vu=d, dist=d) for e, d in zip(config.eps_list, config.synthetic_distances)]
        reporting.write_sweep(out / "sweep.csv", rows)
        reporting.write_fit(out / "fit.csv", fit)
        print(f"Lambda={fit.Lambda!r} phi={fit.phi!r} r_squared={fit.r_squared!r}")
        return EXIT_OK

    cert = certify(config.delta, config.eps_list[0], config.n_max, config.tol)
    eps_s: Optional[float] = cert.eps_s_estimate
    above = [e for e in config.eps_list if e > cert.eps_s_estimate]
    if above:
        if config.n_star is None:
            print(f"refused: eps {above} above eps_s≈{cert.eps_s_estimate!r}; set n_star to override", file=sys.stderr)
            return EXIT_USAGE
        log_warning("eps_above_threshold", eps=above, eps_s=cert.eps_s_estimate, n_star=config.n_star)
        eps_s = None

    windows = shared_windows(config, cert)
    _, cloud, cfg = parabolic_manifold(config, windows)
    result = sweep_eps(
        cloud,
        config.eps_list,
        windows,
        cfg,
        manifold_settings(config),
        eps_s=eps_s,
        compact_map=config.compact_map,
        max_workers=config.workers,
    )
    reporting.write_sweep(out / "sweep.csv", result.rows)
    reporting.write_fit(out / "fit.csv", result.fit)

    singular = _singular_limit(config, windows)
    reporting.write_singular_limit(out / "singular_limit.csv", singular)
    print(f"N*={windows.n_star} eps_s≈{cert.eps_s_estimate!r}")
    for row in result.rows:
        print(f"  eps={row.eps!r} dist={row.dist:.6e}")
    fit = result.fit
    print(f"Lambda={fit.Lambda!r} phi={fit.phi!r} r_squared={fit.r_squared!r}")
    sups = [r.sup_t_norm for r in singular]
    if len(singular) >= 3 and all(s > 0.0 for s in sups):
        slope = fit_power_law([r.eps for r in singular], sups)
        print(f"singular limit slope={slope.phi!r} r_squared={slope.r_squared!r}")
    return EXIT_OK


def _sandwich_audit(config: ExperimentConfig) -> AuditReport:
    rng = np.random.default_rng(config.seed)
    worst = -math.inf
    checked = 0
    for eps in (1.0, 0.5, 0.1, 0.01):
        u = rng.standard_normal((1000, config.n_modes)) / np.arange(1, config.n_modes + 1) ** 2
        v = rng.standard_normal((1000, config.n_modes)) / np.arange(1, config.n_modes + 1) ** 2
        n3 = n3_coeffs(u, v, eps)
        x3 = xeps_norm_sq_coeffs(u, v, 3, eps)
        excess = np.maximum(0.5 * x3 - n3, n3 - 2.5 * x3) / x3
        worst = max(worst, float(np.max(excess)))
        checked += excess.size
    return AuditReport(name="n3_sandwich", passed=worst <= 0.0, max_violation=worst, slack=0.0, n_checked=checked)


def _tail_audit() -> AuditReport:
    worst = -math.inf
    for n in (1, 10, 100):
        tail = tail_sum(n)
        worst = max(worst, 1.0 / (n + 1) - tail, tail - 1.0 / n)
    return AuditReport(name="tail_bracket", passed=worst <= 0.0, max_violation=worst, slack=0.0, n_checked=3)


def cmd_audit(config: ExperimentConfig) -> int:
    """Every audit with explicit constants in one report."""
    out = _out_dir(config)
    u0 = random_data(config)
    pcfg = parabolic_config(config)
    reports = audit_all(evolve(u0, config.T, pcfg), u0, pcfg.f, config.slack)
    hcfg = hyperbolic_config(pcfg, config.eps, auto_halve_dt=True)
    state0 = lift(u0, pcfg.f)
    traj = evolve_hyperbolic(state0, config.T, hcfg)
    reports += [
        check_energy_decay(traj, config.slack),
        check_decomposition(evolve_decomposed(state0, config.T, hcfg), traj),
        _sandwich_audit(config),
        _tail_audit(),
    ]
    reporting.write_audits(out / "audits.csv", reports)
    for report in reports:
        print(_audit_line(report))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_AUDIT


COMMANDS: Dict[str, Callable[[ExperimentConfig], int]] = {
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "manifold": cmd_manifold,
    "robustness": cmd_robustness,
    "audit": cmd_audit,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cimlab", description="Compact inertial manifold laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").splitlines()[0])
        p.add_argument("--config", type=Path, help="KEY=VALUE config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--eps-list", type=str, help="comma-separated, strictly decreasing")
        p.add_argument("--delta", type=float)
        p.add_argument("--modes", type=int, dest="n_modes")
        p.add_argument("--dt", type=float)
        if name in ("simulate", "audit", "certify"):
            p.add_argument("--eps", type=float)
        if name == "simulate":
            p.add_argument("--flow", choices=["parabolic", "hyperbolic"])
            p.add_argument("--T", type=float, dest="T")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = load_config(args.config, overrides)
        return COMMANDS[args.command](config)
    except (ConfigError, DomainError) as exc:
        log_error("usage_error", command=args.command, error=str(exc))
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, PipelineError) as exc:
        log_error("numerical_failure", command=args.command, error=str(exc))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LabError as exc:
        log_error("run_failed", command=args.command, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
