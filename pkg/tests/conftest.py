import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mellinlab.core_fields import LogRadialGrid, make_spherical_quadrature, sample_field

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def gauss3():
    """f = exp(-r^2/2) in n = 3 on the default grid, radial data on a full rule."""
    return sample_field(lambda r, w: np.exp(-r ** 2 / 2) + 0 * w[..., 0], n=3, order=2)


@pytest.fixture(scope="session")
def wide_gauss3():
    """Same Gaussian on a grid wide enough for |x|^{-2} weights."""
    grid = LogRadialGrid(-24.0, 12.0, 2048)
    return sample_field(lambda r, w: np.exp(-r ** 2 / 2) + 0 * w[..., 0], grid, n=3, order=2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
