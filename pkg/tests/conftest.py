import warnings

import pytest

from planarcqed import default_setup


@pytest.fixture(scope="session")
def setup1():
    return default_setup(1)


@pytest.fixture(scope="session")
def setup3():
    return default_setup(3)


@pytest.fixture(scope="session")
def setup5():
    return default_setup(5)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
