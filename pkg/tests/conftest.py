import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import fincat
from fincat.files import load_category, load_functor

FIXTURES = os.path.join(os.path.dirname(fincat.__file__), "fixtures")


def fixture_path(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


@pytest.fixture(scope="session")
def fix():
    return fixture_path


@pytest.fixture(scope="session")
def kite():
    return load_category(fixture_path("kite.fincat"))


@pytest.fixture(scope="session")
def f_kite():
    return load_functor(fixture_path("f_kite.fun"))


@pytest.fixture(scope="session")
def incl_a4_b6():
    return load_functor(fixture_path("incl_a4_b6.fun"))


@pytest.fixture(scope="session")
def h_on_a():
    return load_functor(fixture_path("h_on_a.fun"))


@pytest.fixture(scope="session")
def g_on_a():
    return load_functor(fixture_path("g_on_a.fun"))


@pytest.fixture(scope="session")
def g_on_b():
    return load_functor(fixture_path("g_on_b.fun"))
