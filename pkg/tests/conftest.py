import pytest

from sususy.config import ScanConfig


@pytest.fixture(scope="session")
def cfg():
    return ScanConfig()


@pytest.fixture(scope="session")
def curve_solution(cfg):
    """Integrated particular solution for lambda = 2 (beta(0) = -0.5)."""
    from sususy.beta_ode import beta_particular, integrate

    return integrate(beta_particular(2.0, 0.0), cfg)
