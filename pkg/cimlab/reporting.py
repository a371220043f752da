"""Deterministic CSV output.

Every file starts with a ``# schema: cimlab.<kind>.v1`` comment line followed
by a header row.  Floats are written with ``repr`` precision so that two runs
with the same configuration produce byte-identical files.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from cimlab.adapters.hyperbolic import n3_coeffs
from cimlab.adapters.spectral import xeps_norm_sq_coeffs
from cimlab.middleware.logging import log_info
from cimlab.models.flows import AuditReport, DecomposedTrajectory, HyperbolicTrajectory, TrajectoryRecord
from cimlab.models.gap import GapCertificate
from cimlab.models.manifold import ManifoldCloud
from cimlab.models.robustness import RobustnessFit, SingularLimitReport, SweepRow

SCHEMA_VERSION = "v1"


def format_cell(value: object) -> str:
    """Render one CSV cell."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "item"):
        # numpy scalars
        return format_cell(value.item())
    return str(value)


def write_csv(
    path: Path | str,
    kind: str,
    header: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> Path:
    """Write ``rows`` under ``header`` to ``path`` and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_rows = 0
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: cimlab.{kind}.{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            n_rows += 1
    log_info("csv_written", path=str(path), kind=kind, rows=n_rows)
    return path


def read_csv(path: Path | str) -> tuple[str, list[str], list[list[str]]]:
    """Read a file written by :func:`write_csv` as ``(schema, header, rows)``."""
    with open(path, newline="") as fh:
        schema = fh.readline().strip()
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return schema, header, rows


# ---------------------------------------------------------------------------
# Record writers
# ---------------------------------------------------------------------------
def _mode_columns(prefix: str, n_modes: int) -> list[str]:
    return [f"{prefix}_{i}" for i in range(1, n_modes + 1)]


def write_trajectory(path: Path | str, record: TrajectoryRecord) -> Path:
    header = ["time", *_mode_columns("coeff", record.n_modes), "l2", "h1", "lyapunov"]
    rows = (
        [record.times[i], *record.coeffs[i], record.l2[i], record.h1[i], record.lyapunov[i]]
        for i in range(record.size)
    )
    return write_csv(path, "trajectory", header, rows)


def write_hyperbolic_trajectory(path: Path | str, traj: HyperbolicTrajectory) -> Path:
    n = traj.n_modes
    header = ["time", *_mode_columns("u", n), *_mode_columns("v", n), "xeps1", "xeps2", "n3"]
    rows = (
        [traj.times[i], *traj.u[i], *traj.v[i], traj.xeps1[i], traj.xeps2[i], traj.n3[i]]
        for i in range(traj.size)
    )
    return write_csv(path, "hyperbolic_trajectory", header, rows)


def write_decomposition(path: Path | str, decomposed: DecomposedTrajectory) -> Path:
    """Norms of the decaying part ``v`` and the compact part ``w`` over time."""
    eps = decomposed.eps
    v, w = decomposed.v, decomposed.w
    v_norm = np.sqrt(xeps_norm_sq_coeffs(v[:, 0], v[:, 1], 1, eps))
    w_norm = np.sqrt(xeps_norm_sq_coeffs(w[:, 0], w[:, 1], 1, eps))
    w_n3 = n3_coeffs(w[:, 0], w[:, 1], eps)
    rows = ([decomposed.times[i], v_norm[i], w_norm[i], w_n3[i]] for i in range(decomposed.size))
    return write_csv(path, "decomposition", ["time", "v_xeps1", "w_xeps1", "w_n3"], rows)


def write_audits(path: Path | str, reports: Iterable[AuditReport]) -> Path:
    header = ["name", "passed", "max_violation", "slack", "n_checked", "first_violation_time"]
    rows = (
        [r.name, r.passed, r.max_violation, r.slack, r.n_checked, "" if r.first_violation_time is None else r.first_violation_time]
        for r in reports
    )
    return write_csv(path, "audits", header, rows)


def write_certificate(path: Path | str, cert: GapCertificate) -> Path:
    header = ["delta", "ell", "n_star_parabolic", "eps", "n_star_hyperbolic", "eps_s", "eps_s_found"]
    n_h = "" if cert.n_star_hyperbolic is None else cert.n_star_hyperbolic
    row = [cert.delta, cert.ell, cert.n_star_parabolic, cert.eps, n_h, cert.eps_s_estimate, cert.eps_s_found]
    return write_csv(path, "certificate", header, [row])


def write_margins(path: Path | str, cert: GapCertificate) -> Path:
    rows = ([m.condition, m.n, m.lhs, m.rhs, m.satisfied] for m in cert.margins)
    return write_csv(path, "margins", ["condition", "n", "lhs", "rhs", "satisfied"], rows)


def write_cloud(path: Path | str, cloud: ManifoldCloud) -> Path:
    n = cloud.n_modes
    if cloud.kind == "parabolic":
        header = ["tau", "t", *_mode_columns("coeff", n)]
        rows = ([cloud.tau[i], cloud.t[i], *cloud.points[i]] for i in range(cloud.size))
    else:
        header = ["tau", "t", *_mode_columns("u", n), *_mode_columns("v", n)]
        rows = ([cloud.tau[i], cloud.t[i], *cloud.points[i, 0], *cloud.points[i, 1]] for i in range(cloud.size))
    return write_csv(path, f"{cloud.kind}_cloud", header, rows)


def write_sweep(path: Path | str, rows: Iterable[SweepRow]) -> Path:
    return write_csv(path, "sweep", ["eps", "d_uv", "d_vu", "dist"], ([r.eps, r.d_uv, r.d_vu, r.dist] for r in rows))


def write_fit(path: Path | str, fit: RobustnessFit) -> Path:
    return write_csv(path, "fit", ["Lambda", "phi", "r_squared"], [[fit.Lambda, fit.phi, fit.r_squared]])


def write_singular_limit(path: Path | str, reports: Iterable[SingularLimitReport]) -> Path:
    rows = ([r.eps, r.sup_t_norm, r.window[0], r.window[1]] for r in reports)
    return write_csv(path, "singular_limit", ["eps", "sup_t_norm", "t_start", "t_end"], rows)
