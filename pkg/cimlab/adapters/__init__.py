"""Adapter exports."""

from .gap import certify, eps_s_search, hyperbolic_eigenvalues, lipschitz_constant, parabolic_min_dim
from .hyperbolic import evolve_decomposed, evolve_hyperbolic, norm_N3, step_hyperbolic
from .manifold import (
    apply_compatibility,
    build_compact_manifold,
    build_omega_K,
    fit_graph_hyperbolic,
    fit_graph_parabolic,
)
from .parabolic import evolve, extension_E, lyapunov, step
from .robustness import fit_power_law, lift, run_singular_limit, semidist, sweep_eps, symdist, tail_sum
from .spectral import cubic, gamma_apply, gamma_cutoff, get_transform, l4_norm4, norm_hs, norm_xeps, project_P, project_Q

__all__ = [
    "get_transform",
    "norm_hs",
    "norm_xeps",
    "project_P",
    "project_Q",
    "cubic",
    "gamma_cutoff",
    "gamma_apply",
    "l4_norm4",
    "lipschitz_constant",
    "parabolic_min_dim",
    "hyperbolic_eigenvalues",
    "certify",
    "eps_s_search",
    "step",
    "evolve",
    "lyapunov",
    "extension_E",
    "step_hyperbolic",
    "evolve_hyperbolic",
    "evolve_decomposed",
    "norm_N3",
    "fit_graph_parabolic",
    "fit_graph_hyperbolic",
    "build_omega_K",
    "build_compact_manifold",
    "apply_compatibility",
    "lift",
    "semidist",
    "symdist",
    "run_singular_limit",
    "sweep_eps",
    "fit_power_law",
    "tail_sum",
]
