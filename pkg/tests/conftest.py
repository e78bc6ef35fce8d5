import pytest

from qam import Interval, VectorSampler, default_catalog


@pytest.fixture(scope="session")
def iv():
    return Interval(1.0, 10.0)


@pytest.fixture(scope="session")
def catalog(iv):
    return default_catalog(iv)


@pytest.fixture()
def sampler():
    return VectorSampler(seed=123, count=300)
