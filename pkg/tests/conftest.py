import numpy as np
import pytest

from stochlyap.wiener import generate_path


@pytest.fixture(scope="session")
def short_path():
    """A 20000-step path at dt = 0.001, shared by the cheaper tests."""
    return generate_path(42, 20_000, 0.001)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))
