import os

import numpy as np
import pytest

from cimlab.models.flows import HyperbolicConfig, ParabolicConfig
from cimlab.models.spectral import SpectralField


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def smooth_field(rng):
    """Random field with coefficients decaying like 1/n²."""

    def make(n_modes: int, scale: float = 1.0) -> SpectralField:
        n = np.arange(1, n_modes + 1)
        return SpectralField(coeffs=scale * rng.standard_normal(n_modes) / n**2)

    return make


@pytest.fixture
def pcfg():
    return ParabolicConfig(n_modes=8, dt=1e-3)


@pytest.fixture
def hcfg():
    return HyperbolicConfig(n_modes=8, dt=1e-3, eps=0.1)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep ambient CIMLAB_* variables out of config layering and the service."""
    for key in list(os.environ):
        if key.upper().startswith("CIMLAB_") and key.upper() != "CIMLAB_LOG_LEVEL":
            monkeypatch.delenv(key, raising=False)
