import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from loglab import Grid, ResourceProfile

settings.register_profile(
    "solver",
    max_examples=12,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)

SUITE = {
    "constant": ResourceProfile.constant(1.0),
    "linear": ResourceProfile.linear(0.0, 1.0),
    "shifted_ramp": ResourceProfile.shifted_ramp(0.25),
    "sine_offset": ResourceProfile.sine_offset(1.5, 0.4),
    "cosine_offset": ResourceProfile.cosine_offset(1.0, 1.0),
    "single_peak": ResourceProfile.single_peak(),
}
NONCONSTANT = {k: v for k, v in SUITE.items() if k != "constant"}


@pytest.fixture(scope="session")
def grid():
    return Grid(1025)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(257)


def sup(u):
    return float(np.max(np.abs(np.asarray(u, dtype=float))))
