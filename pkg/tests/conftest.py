"""Shared fixtures: the small universes reused all over the suite."""

import pytest

from uniset.core import Params, enumerate_universe


@pytest.fixture(scope="session")
def u23():
    return enumerate_universe(Params(2, 3))


@pytest.fixture(scope="session")
def u24():
    return enumerate_universe(Params(2, 4))


@pytest.fixture(scope="session")
def u33():
    return enumerate_universe(Params(3, 3))


@pytest.fixture(scope="session")
def u25():
    return enumerate_universe(Params(2, 5))
