import pytest

from logsis.model import SisParams


@pytest.fixture
def canonical():
    """Endemic-scale parameter set used throughout: eta = 5, R0 just above 1."""
    return SisParams(beta=0.5, mu=20.0, gamma=25.0, sigma=0.035, cap_n=100.0, i0=1.0)


@pytest.fixture
def large_noise():
    """Same skeleton with sigma pushed past the large-noise threshold."""
    return SisParams(beta=0.5, mu=20.0, gamma=25.0, sigma=0.08, cap_n=100.0, i0=1.0)


@pytest.fixture
def borderline():
    """Noise too weak for the large-noise test, R0 too big for the small-noise one."""
    return SisParams(beta=0.5, mu=20.0, gamma=25.0, sigma=0.01, cap_n=100.0, i0=1.0)
