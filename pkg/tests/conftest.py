import numpy as np
import pytest

from osclab.lab import Lab


@pytest.fixture(scope="session")
def lab_a0():
    return Lab.make(a=0, ns=96, s_range=12.0)


@pytest.fixture(scope="session")
def lab_a1():
    return Lab.make(a=1, ns=128, s_range=14.0)


@pytest.fixture(scope="session")
def lab_a2():
    return Lab.make(a=2, ns=128, s_range=14.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
