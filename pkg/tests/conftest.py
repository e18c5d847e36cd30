import numpy as np
import pytest

from stringlab import DataFamily, ProfileSpec


@pytest.fixture
def unit_gaussian():
    return ProfileSpec("gaussian", 1.0, 0.0, 1.0)


@pytest.fixture
def default_family():
    """delta = 0.1 family with the default width-2 unit-amplitude seeds."""
    return DataFamily(gamma=0.5, delta=0.1,
                      f=ProfileSpec("gaussian", 1.0, 0.0, 2.0),
                      fb=ProfileSpec("gaussian", 1.0, 0.0, 2.0))


@pytest.fixture
def travelling_family():
    return DataFamily(gamma=0.5, delta=0.0,
                      f=ProfileSpec("gaussian", 1.0, 0.0, 2.0),
                      fb=ProfileSpec("gaussian", 1.0, 0.0, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
