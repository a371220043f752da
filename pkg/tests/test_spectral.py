import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import trapezoid

from cimlab.adapters.spectral import (
    cubic,
    eigenvalue,
    gamma_apply,
    gamma_cutoff,
    gamma_values,
    get_transform,
    inner,
    l4_norm4,
    norm_hs,
    norm_xeps,
    project_P,
    project_Q,
    reaction_coeffs,
)
from cimlab.errors import DomainError, RangeError
from cimlab.models.spectral import CutoffParams, EpsWeight, ProductState, SpectralField

FINE = np.linspace(0.0, math.pi, 20001)


def e(n: int, n_modes: int = 6) -> SpectralField:
    return SpectralField.basis(n, n_modes)


def fine_values(field: SpectralField) -> np.ndarray:
    n = np.arange(1, field.n_modes + 1)
    return math.sqrt(2.0 / math.pi) * np.sin(np.outer(FINE, n)) @ field.coeffs


def fine_coeffs(values: np.ndarray, n_modes: int) -> np.ndarray:
    n = np.arange(1, n_modes + 1)
    basis = math.sqrt(2.0 / math.pi) * np.sin(np.outer(FINE, n))
    return trapezoid(values[:, None] * basis, FINE, axis=0)


def test_eigenvalue():
    assert eigenvalue(10) == 100.0
    assert eigenvalue(1) == 1.0
    with pytest.raises(DomainError):
        eigenvalue(0)


def test_transform_round_trip(smooth_field):
    u = smooth_field(12)
    t = get_transform(12)
    assert np.allclose(t.analysis(t.synthesis(u.coeffs)), u.coeffs, atol=1e-13)
    assert get_transform(12) is t


def test_synthesis_matches_basis():
    t = get_transform(5)
    values = t.synthesis(e(3, 5).coeffs)
    assert np.allclose(values, math.sqrt(2.0 / math.pi) * np.sin(3 * t.x), atol=1e-13)


def test_norms_on_basis_vectors():
    assert norm_hs(e(1), 1) == pytest.approx(1.0)
    assert norm_hs(e(3), 1) == pytest.approx(3.0)
    assert norm_hs(e(3), 0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        norm_hs(e(1), -1)


def test_norm_xeps():
    state = ProductState(u=e(1), v=e(1))
    assert norm_xeps(state, 1, 0.0) == pytest.approx(1.0)
    assert norm_xeps(state, 1, EpsWeight(eps=0.25)) == pytest.approx(math.sqrt(1.25))
    state = ProductState(u=e(2), v=e(2))
    # 2^(2·2) + eps·2^(2·1)
    assert norm_xeps(state, 2, 0.5) == pytest.approx(math.sqrt(16.0 + 0.5 * 4.0))
    with pytest.raises(DomainError):
        norm_xeps(state, 4, 0.5)
    with pytest.raises(DomainError):
        norm_xeps(state, 1, 1.5)


def test_projections():
    assert project_P(e(3), 2) == SpectralField.zeros(6)
    assert project_Q(e(3), 2) == e(3)
    assert project_P(e(2), 2) == e(2)
    assert project_Q(e(2), 2) == SpectralField.zeros(6)
    both = e(1) + e(3)
    assert project_P(both, 2) == e(1)
    assert project_Q(both, 2) == e(3)
    with pytest.raises(RangeError):
        project_P(both, 0)
    with pytest.raises(RangeError):
        project_Q(both, 7)


def test_inner_is_orthonormal():
    assert inner(e(2), e(2)) == 1.0
    assert inner(e(2), e(4)) == 0.0


def test_cubic_zero_and_parity(smooth_field):
    assert cubic(SpectralField.zeros(8)) == SpectralField.zeros(8)
    u = smooth_field(8)
    assert np.array_equal(cubic(-u).coeffs, -cubic(u).coeffs)


def test_cubic_of_first_mode_closed_form():
    c = 0.7
    out = cubic(c * e(1, 8)).coeffs
    expected = np.zeros(8)
    # sin³ = (3 sin x - sin 3x)/4
    expected[0] = c**3 * (2.0 / math.pi) * 0.75
    expected[2] = -(c**3) * (2.0 / math.pi) * 0.25
    assert np.allclose(out, expected, atol=1e-12)


def test_cubic_matches_fine_quadrature(smooth_field):
    u = smooth_field(6)
    oracle = fine_coeffs(fine_values(u) ** 3, 6)
    assert np.allclose(cubic(u).coeffs, oracle, atol=1e-8)


def test_l4_norm():
    assert l4_norm4(SpectralField.zeros(4)) == 0.0
    assert l4_norm4(e(1, 4)) == pytest.approx(3.0 / (2.0 * math.pi), abs=1e-12)


def test_l4_matches_quadrature_and_scales(smooth_field):
    u = smooth_field(7)
    assert l4_norm4(u) == pytest.approx(trapezoid(fine_values(u) ** 4, FINE), rel=1e-8)
    assert l4_norm4(2.0 * u) == pytest.approx(16.0 * l4_norm4(u), rel=1e-10)


def test_gamma_cutoff_shape():
    params = CutoffParams(delta=1.5)
    r = np.linspace(-10.0, 10.0, 2001)
    g = gamma_values(r, 1.5)
    inside = np.abs(r) <= 1.5
    assert np.array_equal(g[inside], r[inside])
    assert np.allclose(gamma_values(-r, 1.5), -g)
    assert np.all(np.abs(g) <= 2.0 * 1.5 - 1.0)
    assert np.all(np.diff(g) >= 0.0)
    assert gamma_cutoff(1.5, params) == 1.5
    # C¹ at the junction
    h = 1e-6
    assert (gamma_cutoff(1.5 + h, params) - 1.5) / h == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(ValidationError):
        CutoffParams(delta=1.0)


def test_gamma_apply_is_identity_for_small_fields():
    u = 0.1 * e(1, 8)
    assert np.allclose(gamma_apply(u, CutoffParams(delta=2.0)).coeffs, u.coeffs, atol=1e-14)


def test_reaction_variants(smooth_field):
    u = smooth_field(6)
    f = SpectralField.basis(1, 6, 0.3)
    full = reaction_coeffs(u.coeffs, f.coeffs)
    assert np.allclose(full, f.coeffs + u.coeffs - cubic(u).coeffs)
    assert np.allclose(reaction_coeffs(u.coeffs, f.coeffs, "drop_cubic"), f.coeffs + u.coeffs)
    assert np.array_equal(reaction_coeffs(u.coeffs, f.coeffs, "off"), np.zeros(6))
    # far below the cutoff the modified term coincides with the original
    small = 0.01 * u.coeffs
    assert np.allclose(reaction_coeffs(small, f.coeffs, delta=1.5), reaction_coeffs(small, f.coeffs), atol=1e-14)


def test_field_validation():
    with pytest.raises(ValidationError):
        SpectralField(coeffs=[1.0, float("nan")])
    with pytest.raises(ValidationError):
        SpectralField(coeffs=[])
    with pytest.raises(ValidationError):
        ProductState(u=SpectralField.zeros(2), v=SpectralField.zeros(3))
    u = SpectralField(coeffs=[1.0, 2.0])
    assert not u.coeffs.flags.writeable
    assert u.resized(4).coeffs.tolist() == [1.0, 2.0, 0.0, 0.0]
    assert u.resized(1).coeffs.tolist() == [1.0]
