import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def power_stationary(p, iters=20000):
    """Stationary law by repeated multiplication from the uniform vector."""
    pi = np.full(p.shape[0], 1.0 / p.shape[0])
    for _ in range(iters):
        pi = pi @ p
    return pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
