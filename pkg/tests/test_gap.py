import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError

from cimlab.adapters.gap import (
    EPS_S_CEILING,
    EPS_S_SCAN_POINTS,
    certify,
    eigen_pair,
    eps_s_search,
    hyperbolic_eigenvalues,
    lipschitz_constant,
    parabolic_min_dim,
    slow_rates,
)
from cimlab.errors import DomainError
from cimlab.models.gap import GapCertificate


def brute_force_dim(delta: float) -> int:
    ell = 1.0 + 3.0 * (2.0 * delta - 1.0) ** 2
    for n in range(1, 10_001):
        if (n + 1) ** 2 - n**2 > 4.0 * ell and (n + 1) ** 2 > 2.0 * ell:
            return n
    raise AssertionError("no split below 10^4")


def certified(eps: float, delta: float, n_max: int = 64) -> bool:
    """Independent re-statement of the hyperbolic gap test."""
    ell = 1.0 + 3.0 * (2.0 * delta - 1.0) ** 2
    alpha = 1.0 / (2.0 * math.sqrt(eps))
    rates = []
    for j in range(1, n_max + 2):
        disc = alpha * alpha - j * j
        slow = j * j / (alpha + math.sqrt(disc)) if disc >= 0.0 else alpha
        rates.append(2.0 * alpha * slow)
    return any(
        rates[n] - rates[n - 1] > 4.0 * ell and rates[n] > 2.0 * ell for n in range(1, n_max + 1)
    )


def test_lipschitz_constant():
    assert lipschitz_constant(1.5) == 13.0
    assert lipschitz_constant(2.0) == 28.0
    assert lipschitz_constant(1.0 + 1e-12) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        lipschitz_constant(1.0)


@pytest.mark.parametrize("delta", [1.1, 1.25, 1.5, 2.0, 3.0])
def test_parabolic_min_dim_matches_brute_force(delta):
    assert parabolic_min_dim(delta) == brute_force_dim(delta)


def test_parabolic_min_dim_known_value():
    assert parabolic_min_dim(1.5) == 26


@pytest.mark.parametrize("eps,j", [(0.01, 1), (0.01, 7), (0.25, 1), (1.0, 3), (1e-4, 20)])
def test_eigenvalues_satisfy_vieta(eps, j):
    slow, fast = hyperbolic_eigenvalues(eps, j)
    alpha = 1.0 / (2.0 * math.sqrt(eps))
    assert slow + fast == pytest.approx(2.0 * alpha, rel=1e-12)
    assert slow * fast == pytest.approx(j * j, rel=1e-9)
    for mu in (slow, fast):
        assert abs(mu * mu - 2.0 * alpha * mu + j * j) <= 1e-9 * max(1.0, abs(mu) ** 2)


def test_eigenvalues_real_and_complex_regimes():
    slow, fast = hyperbolic_eigenvalues(0.01, 1)
    assert slow.imag == 0.0 and fast.imag == 0.0
    assert slow.real < fast.real
    slow, fast = hyperbolic_eigenvalues(0.01, 7)
    assert slow == fast.conjugate()
    assert slow.real == pytest.approx(5.0)
    pair = eigen_pair(0.01, 1)
    assert pair.is_real
    assert not eigen_pair(0.01, 7).is_real
    with pytest.raises(DomainError):
        hyperbolic_eigenvalues(0.0, 1)
    with pytest.raises(DomainError):
        hyperbolic_eigenvalues(0.1, 0)


def test_slow_rates_tend_to_parabolic_eigenvalues():
    rates = slow_rates(1e-10, 10)
    assert np.allclose(rates, np.arange(1, 11) ** 2, rtol=1e-6)
    # original-clock slow rate equals 2α times the rescaled slow root
    eps = 0.003
    slow, _ = hyperbolic_eigenvalues(eps, 4)
    alpha = 1.0 / (2.0 * math.sqrt(eps))
    assert slow_rates(eps, 4)[3] == pytest.approx(2.0 * alpha * slow.real, rel=1e-10)


def test_certificate_at_delta_three_halves():
    cert = certify(1.5, 1e-3)
    assert cert.ell == 13.0
    assert cert.n_star_parabolic == 26
    assert cert.n_star_hyperbolic == 13
    assert cert.eps_s_found
    assert cert.margins
    assert all(m.satisfied for m in cert.margins if m.condition.startswith("parabolic"))
    # the recorded hyperbolic margin at the certified index is satisfied
    hit = [m for m in cert.margins if m.condition == "hyperbolic_gap" and m.n == 13]
    assert hit and hit[0].satisfied


def test_small_eps_recovers_parabolic_dimension():
    cert = certify(1.5, 1e-6)
    assert cert.n_star_hyperbolic == 26


def test_large_eps_has_no_hyperbolic_split():
    cert = certify(1.5, 1e-2)
    assert cert.n_star_hyperbolic is None
    assert cert.n_star_parabolic == 26
    assert len([m for m in cert.margins if m.condition == "hyperbolic_gap"]) == 64


def test_certify_rejects_bad_input():
    with pytest.raises(DomainError):
        certify(0.9, 1e-3)
    with pytest.raises(DomainError):
        certify(1.5, 0.0)
    with pytest.raises(DomainError):
        certify(1.5, 1e-3, n_max=0)


def test_eps_s_matches_scan_oracle():
    delta = 1.5
    value = eps_s_search(delta)
    assert 0.0 < value < EPS_S_CEILING
    # certified for every α² >= 144; α² ≈ 85 is a hole wider than the scan step
    assert 1.0 / 576.0 <= value <= 1.0 / 256.0
    step = EPS_S_CEILING / EPS_S_SCAN_POINTS
    grid = step * np.arange(1, EPS_S_SCAN_POINTS + 1)
    first_fail = next(i for i, e in enumerate(grid) if not certified(float(e), delta))
    assert grid[first_fail - 1] <= value <= grid[first_fail]
    # every scanned eps below the threshold is certified
    assert all(certified(float(e), delta) for e in grid[grid <= value])
    assert certified(value, delta)


def test_eps_s_is_cached_and_reported():
    assert eps_s_search(1.5) == eps_s_search(1.5)
    cert = certify(1.5, 1e-4)
    assert cert.eps_s_estimate == eps_s_search(1.5)


def test_certificate_model_validation():
    with pytest.raises(ValidationError):
        GapCertificate(delta=1.5, ell=13.0, n_star_parabolic=26, eps=1e-3, eps_s_estimate=0.3)
    with pytest.raises(ValidationError):
        GapCertificate(delta=1.0, ell=4.0, n_star_parabolic=1, eps=1e-3, eps_s_estimate=0.0)


def test_complex_sqrt_branch_is_principal():
    slow, fast = hyperbolic_eigenvalues(1.0, 2)
    alpha = 0.5
    assert fast == pytest.approx(alpha + cmath.sqrt(alpha * alpha - 4))


def test_eigenvalues_on_random_pairs(rng):
    eps_values = 10.0 ** rng.uniform(-6.0, 0.0, 1000)
    modes = rng.integers(1, 65, 1000)
    for eps, j in zip(eps_values, modes):
        j = int(j)
        alpha = 1.0 / (2.0 * math.sqrt(eps))
        slow, fast = hyperbolic_eigenvalues(float(eps), j)
        for mu in (slow, fast):
            scale = max(1.0, abs(mu) ** 2, 2.0 * alpha * abs(mu), j * j)
            assert abs(mu * mu - 2.0 * alpha * mu + j * j) <= 1e-10 * scale
        if eps <= 1.0 / (4.0 * j * j):
            assert slow.imag == 0.0 and fast.imag == 0.0
            assert 0.0 < slow.real <= fast.real
        else:
            assert slow.imag != 0.0
            assert slow == fast.conjugate()


@pytest.mark.parametrize("j", [1, 2, 8, 64])
def test_eigenvalues_change_regime_at_the_double_root(j):
    eps = 1.0 / (4.0 * j * j)
    slow, fast = hyperbolic_eigenvalues(eps, j)
    assert slow == fast == complex(j, 0.0)
    below = hyperbolic_eigenvalues(eps * (1.0 - 1e-9), j)
    assert below[0].imag == 0.0 and below[1].imag == 0.0
    above = hyperbolic_eigenvalues(eps * (1.0 + 1e-9), j)
    assert above[0].imag < 0.0 < above[1].imag


def test_slow_root_keeps_its_digits_for_small_eps():
    slow, _ = hyperbolic_eigenvalues(1e-12, 1)
    # α = 5e5, so the slow root is λ/(2α) to leading order
    assert slow.real == pytest.approx(1e-6, rel=1e-9)
