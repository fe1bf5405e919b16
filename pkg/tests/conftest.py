import pytest

from primesum.prime_engine import store_for


@pytest.fixture(scope="session")
def small_store():
    return store_for(10**5)


@pytest.fixture(scope="session")
def store_1e6():
    return store_for(10**6)


@pytest.fixture(scope="session")
def store_1e7():
    return store_for(10**7)
