import numpy as np
import pytest

from duhem import boucwen, dahl, exp_example


@pytest.fixture(scope="session")
def dahl_r1():
    return dahl()


@pytest.fixture(scope="session")
def dahl_r3():
    return dahl(rho=1.5, fc=0.75, r=3.0)


@pytest.fixture(scope="session")
def bw():
    return boucwen()


@pytest.fixture(scope="session")
def exp_model():
    return exp_example()


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
