import numpy as np
import pytest

from ferrojet.wnl import MagnetizationLaw


@pytest.fixture(scope="session")
def linear_law():
    return MagnetizationLaw.linear()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
