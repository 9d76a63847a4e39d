import pytest

from entbath.model import build_config
from entbath.spectral import SpectralDensityHandle


@pytest.fixture(scope="session")
def default_point():
    """Figure-default parameters: omega_c=3, kappa=0.5, r=3, s=0.5, eta=0.05."""
    config, spectral, bath = build_config()
    return config, spectral, bath, SpectralDensityHandle(spectral)


@pytest.fixture(scope="session")
def subohmic_strong():
    """Sub-Ohmic strong coupling (one localized mode): s=0.5, eta=0.3."""
    config, spectral, bath = build_config(s=0.5, eta=0.3)
    return config, spectral, bath, SpectralDensityHandle(spectral)


@pytest.fixture(scope="session")
def ohmic_weak_warm():
    """Ohmic weak coupling at T=0.1: s=1, eta=0.05."""
    config, spectral, bath = build_config(s=1.0, eta=0.05, temperature=0.1)
    return config, spectral, bath, SpectralDensityHandle(spectral)
