import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mbk import RandomStream

# the suite must produce the same verdict on every invocation
settings.register_profile(
    "deterministic",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")


@pytest.fixture
def rng():
    return RandomStream(12345)


@pytest.fixture
def four_points():
    """1-d instance with a known optimal 2-clustering: {0, 0.1} | {0.9, 1.0}."""
    return np.array([[0.0], [0.1], [0.9], [1.0]])


@pytest.fixture
def blobs():
    """Two clearly separated blobs in the unit square, 40 points."""
    stream = RandomStream(777)
    a = 0.15 + 0.05 * stream.normal(size=(20, 2))
    b = 0.85 + 0.05 * stream.normal(size=(20, 2))
    return np.clip(np.vstack([a, b]), 0.0, 1.0)
