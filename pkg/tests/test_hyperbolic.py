import math

import numpy as np
import pytest
from scipy.linalg import expm

from cimlab.adapters.hyperbolic import (
    calibrate_C3,
    check_decomposition,
    check_energy_decay,
    entry_time_hyperbolic,
    evolve_decomposed,
    evolve_hyperbolic,
    flow_compact_part,
    hyperbolic_energy,
    linear_propagator,
    n3_coeffs,
    norm_N3,
    step_hyperbolic,
)
from cimlab.adapters.robustness import lift
from cimlab.adapters.spectral import xeps_norm_sq_coeffs
from cimlab.errors import DomainError
from cimlab.models.flows import DecomposedTrajectory, HyperbolicConfig
from cimlab.models.spectral import ProductState, SpectralField


def mode_matrix(lam: float, eps: float) -> np.ndarray:
    return np.array([[0.0, 1.0], [-lam / eps, -1.0 / eps]])


@pytest.mark.parametrize("eps", [1.0, 0.3, 0.25, 0.1, 0.01])
def test_linear_block_matches_matrix_exponential(eps):
    h = 0.01
    prop = linear_propagator(6, eps, h)
    for n in range(1, 7):
        ref = expm(mode_matrix(float(n * n), eps) * h)
        assert np.allclose(prop[n - 1], ref, rtol=1e-9, atol=1e-12)


def test_double_root_closed_form():
    h = 0.05
    prop = linear_propagator(1, 0.25, h)[0]
    expected = math.exp(-2.0 * h) * np.array([[1.0 + 2.0 * h, h], [-4.0 * h, 1.0 - 2.0 * h]])
    assert np.allclose(prop, expected, rtol=1e-12, atol=1e-15)


def test_linear_flow_is_exact(smooth_field):
    cfg = HyperbolicConfig(n_modes=5, eps=0.05, dt=1e-2, nonlinearity="off")
    state = ProductState(u=smooth_field(5), v=smooth_field(5))
    traj = evolve_hyperbolic(state, 1.0, cfg)
    for n in range(1, 6):
        ref = expm(mode_matrix(float(n * n), 0.05) * 1.0) @ np.array([state.u.coeffs[n - 1], state.v.coeffs[n - 1]])
        assert traj.u[-1, n - 1] == pytest.approx(ref[0], abs=1e-10)
        assert traj.v[-1, n - 1] == pytest.approx(ref[1], abs=1e-10)


def test_effective_step():
    assert HyperbolicConfig(n_modes=2, eps=5e-4, dt=1e-3).effective_dt == 5e-4
    assert HyperbolicConfig(n_modes=2, eps=5e-4, dt=1e-3, auto_halve_dt=False).effective_dt == 1e-3
    assert HyperbolicConfig(n_modes=2, eps=1e-3, dt=1e-3).effective_dt == 1e-3
    assert HyperbolicConfig(n_modes=2, eps=5e-4, dt=1e-3).parabolic().dt == 5e-4
    with pytest.raises(ValueError):
        HyperbolicConfig(n_modes=2, eps=0.0)


def test_step_keeps_zero(hcfg):
    zero = ProductState.zeros(8)
    assert step_hyperbolic(zero, hcfg) == zero
    with pytest.raises(DomainError):
        step_hyperbolic(ProductState.zeros(4), hcfg)


def test_decomposition_adds_up(smooth_field):
    f = SpectralField.basis(1, 6, 0.3)
    cfg = HyperbolicConfig(n_modes=6, eps=0.05, dt=1e-3, f=f)
    state = lift(smooth_field(6, 0.6), f)
    full = evolve_hyperbolic(state, 2.0, cfg)
    decomposed = evolve_decomposed(state, 2.0, cfg)
    report = check_decomposition(decomposed, full)
    assert report.passed, report
    assert np.array_equal(decomposed.v[0], state.stacked())
    assert np.array_equal(decomposed.w[0], np.zeros((2, 6)))


def test_decaying_part_vanishes(smooth_field):
    f = SpectralField.basis(1, 6, 0.3)
    cfg = HyperbolicConfig(n_modes=6, eps=0.1, dt=1e-2, f=f)
    state = ProductState(u=smooth_field(6, 0.8), v=smooth_field(6, 0.8))
    decomposed = evolve_decomposed(state, 50.0, cfg)
    assert np.max(np.abs(decomposed.v[-1])) < 1e-10
    assert np.max(np.abs(decomposed.w[-1])) > 1e-3


@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
def test_decaying_part_decays_from_unit_data(smooth_field, eps):
    f = SpectralField.basis(1, 6, 0.3)
    cfg = HyperbolicConfig(n_modes=6, eps=eps, dt=1e-2, f=f)
    u, v = smooth_field(6).coeffs, smooth_field(6).coeffs
    scale = math.sqrt(xeps_norm_sq_coeffs(u, v, 1, eps))
    state = ProductState.from_arrays(u / scale, v / scale)
    decomposed = evolve_decomposed(state, 50.0, cfg)
    v_end = decomposed.v[-1]
    assert math.sqrt(xeps_norm_sq_coeffs(v_end[0], v_end[1], 1, eps)) < 1e-3
    report = check_decomposition(decomposed, evolve_hyperbolic(state, 50.0, cfg))
    assert report.passed, report


def test_compact_part_is_bounded_uniformly_in_eps():
    x = np.zeros((2, 8))
    x[0, :2] = [0.5, 0.1]
    sups = []
    for eps in (1.0, 0.1, 0.01):
        cfg = HyperbolicConfig(n_modes=8, eps=eps, dt=1e-2)
        w = evolve_decomposed(ProductState.from_arrays(x[0], x[1]), 50.0, cfg).w
        sups.append(float(np.sqrt(np.max(xeps_norm_sq_coeffs(w[:, 0], w[:, 1], 2, eps)))))
    assert min(sups) > 0.0
    assert max(sups) <= 3.0 * min(sups)


def test_compact_part_matches_decomposed_run(smooth_field):
    cfg = HyperbolicConfig(n_modes=4, eps=0.1, dt=1e-3)
    u = smooth_field(4, 0.5)
    state = ProductState(u=u, v=SpectralField.zeros(4))
    w = flow_compact_part(state.stacked(), [0.5], cfg)[0]
    decomposed = evolve_decomposed(state, 0.5, cfg)
    assert np.allclose(w, decomposed.w[-1], atol=1e-12)


def test_compact_part_vanishes_without_forcing_or_linear_drive():
    cfg = HyperbolicConfig(n_modes=3, eps=0.2, dt=1e-3, nonlinearity="off")
    x = np.array([[0.3, -0.1, 0.05], [1.0, 0.0, 0.0]])
    assert np.array_equal(flow_compact_part(x, [0.4], cfg)[0], np.zeros((2, 3)))


def test_energy_decays_along_lifted_trajectory(smooth_field):
    f = SpectralField.basis(1, 8, 0.2)
    cfg = HyperbolicConfig(n_modes=8, eps=0.1, dt=1e-3, f=f)
    state = lift(smooth_field(8, 0.3), f)
    traj = evolve_hyperbolic(state, 2.0, cfg)
    report = check_energy_decay(traj)
    assert report.passed, report
    assert traj.energy[-1] < traj.energy[0]
    assert hyperbolic_energy(state, f, 0.1) == pytest.approx(traj.energy[0])


def test_energy_audit_flags_a_rise():
    cfg = HyperbolicConfig(n_modes=1, eps=0.5, dt=0.1, nonlinearity="off")
    traj = evolve_hyperbolic(ProductState.from_arrays(np.array([0.0]), np.array([1.0])), 0.2, cfg)
    rigged = traj.model_copy(update={"energy": np.array([0.0, 1.0, 0.5])})
    report = check_energy_decay(rigged)
    assert not report.passed
    assert report.first_violation_time == pytest.approx(0.1)


def test_trajectory_norms(smooth_field):
    cfg = HyperbolicConfig(n_modes=5, eps=0.2, dt=1e-2)
    state = ProductState(u=smooth_field(5), v=smooth_field(5))
    traj = evolve_hyperbolic(state, 0.1, cfg)
    first = traj.state(0)
    assert first == state
    assert traj.xeps1[0] ** 2 == pytest.approx(xeps_norm_sq_coeffs(state.u.coeffs, state.v.coeffs, 1, 0.2))
    assert traj.n3[0] == pytest.approx(norm_N3(state, 0.2))


def test_n3_examples():
    one = SpectralField.basis(1, 3)
    zero = SpectralField.zeros(3)
    assert norm_N3(ProductState(u=one, v=zero), 0.5) == pytest.approx(1.5)
    assert norm_N3(ProductState(u=zero, v=one), 0.5) == pytest.approx(0.5)
    two = SpectralField.basis(2, 3)
    assert norm_N3(ProductState(u=two, v=two), 0.5) == pytest.approx(88.0)
    with pytest.raises(DomainError):
        norm_N3(ProductState(u=one, v=zero), 0.0)
    with pytest.raises(DomainError):
        norm_N3(ProductState(u=one, v=zero), 1.5)


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.1, 0.01])
def test_n3_sandwich(rng, eps):
    n = np.arange(1, 11)
    u = rng.standard_normal((1000, 10)) / n**2
    v = rng.standard_normal((1000, 10)) / n
    n3 = n3_coeffs(u, v, eps)
    x3 = xeps_norm_sq_coeffs(u, v, 3, eps)
    assert np.all(0.5 * x3 <= n3)
    assert np.all(n3 <= 2.5 * x3)


def test_entry_time_hyperbolic():
    assert entry_time_hyperbolic(10.0, 2.0, 0.1) == pytest.approx(5.0 * math.log(2.0 * 9.5 / 3.0))
    assert entry_time_hyperbolic(0.4, 2.0, 0.1) == 0.0
    assert entry_time_hyperbolic(1.0, 2.0, 0.1) == 0.0
    with pytest.raises(DomainError):
        entry_time_hyperbolic(10.0, 1.0, 0.1)


def test_calibrate_c3():
    w = np.zeros((4, 2, 2))
    w[2, 0, 0] = 1.0
    w[3, 0, 0] = 2.0
    # the first half is ignored
    w[0, 0, 0] = 100.0
    decomposed = DecomposedTrajectory(times=[0.0, 1.0, 2.0, 3.0], eps=0.5, v=np.zeros((4, 2, 2)), w=w)
    # N3 of (2 w_1, 0) is 4·(1/2 + 1)
    assert calibrate_C3(decomposed) == pytest.approx(6.0 / 5.0)
