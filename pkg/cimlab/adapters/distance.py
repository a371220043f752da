"""Hausdorff semidistances between finite point clouds in ``X^eps_k``.

The weighted norm ``‖(u, v)‖² = Σ λ_n^k u_n² + eps·Σ λ_n^{k-1} v_n²`` is a
Euclidean norm after scaling each coordinate, so the pairwise distances are
computed with ``cdist`` on scaled copies, one block of rows at a time.
Parabolic clouds use ``H_k`` alone.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from cimlab.errors import DomainError
from cimlab.models.manifold import ManifoldCloud
from cimlab.models.robustness import HausdorffReport

from .spectral import eigenvalues

ROW_BLOCK = 1024


def scaled_coordinates(points: np.ndarray, k: int, eps: float) -> np.ndarray:
    """Flatten ``(P, n)`` or ``(P, 2, n)`` points so Euclidean distance is the ``X^eps_k`` norm."""
    points = np.asarray(points, dtype=float)
    lam = eigenvalues(points.shape[-1])
    if points.ndim == 2:
        return points * np.sqrt(lam**k)
    if points.ndim == 3 and points.shape[1] == 2:
        u = points[:, 0, :] * np.sqrt(lam**k)
        v = points[:, 1, :] * np.sqrt(eps * lam ** (k - 1))
        return np.concatenate([u, v], axis=1)
    raise DomainError(f"cannot measure points of shape {points.shape}")


def semidist_points(U: np.ndarray, V: np.ndarray) -> float:
    """``max_{x∈U} min_{y∈V} |x - y|`` for already-scaled coordinates."""
    if U.shape[0] == 0 or V.shape[0] == 0:
        raise DomainError("distance to or from an empty cloud is undefined")
    if U.shape[1] != V.shape[1]:
        raise DomainError("clouds have different dimensions")
    worst = 0.0
    for start in range(0, U.shape[0], ROW_BLOCK):
        block = cdist(U[start : start + ROW_BLOCK], V)
        worst = max(worst, float(np.max(np.min(block, axis=1))))
    return worst


def _check_pair(U: ManifoldCloud, V: ManifoldCloud) -> None:
    if U.kind != V.kind:
        raise DomainError(f"cannot compare a {U.kind} cloud with a {V.kind} cloud")
    if U.n_modes != V.n_modes:
        raise DomainError(f"mode counts differ: {U.n_modes} vs {V.n_modes}")


def semidist(U: ManifoldCloud, V: ManifoldCloud, k: int = 1, eps: float = 0.0) -> float:
    """``∂(U, V) = sup_{x∈U} inf_{y∈V} ‖x - y‖``."""
    _check_pair(U, V)
    return semidist_points(scaled_coordinates(U.points, k, eps), scaled_coordinates(V.points, k, eps))


def symdist(U: ManifoldCloud, V: ManifoldCloud, k: int = 1, eps: float = 0.0) -> HausdorffReport:
    """Both semidistances and their maximum."""
    _check_pair(U, V)
    su = scaled_coordinates(U.points, k, eps)
    sv = scaled_coordinates(V.points, k, eps)
    d_uv = semidist_points(su, sv)
    d_vu = semidist_points(sv, su)
    return HausdorffReport(d_uv=d_uv, d_vu=d_vu, dist=max(d_uv, d_vu), k=k, eps=eps)


def distance_to_cloud(points: np.ndarray, cloud: ManifoldCloud, k: int = 1, eps: float = 0.0) -> np.ndarray:
    """Distance from each of ``points`` to the nearest cloud point."""
    target = scaled_coordinates(cloud.points, k, eps)
    source = scaled_coordinates(points, k, eps)
    out = np.empty(source.shape[0])
    for start in range(0, source.shape[0], ROW_BLOCK):
        out[start : start + ROW_BLOCK] = np.min(cdist(source[start : start + ROW_BLOCK], target), axis=1)
    return out
