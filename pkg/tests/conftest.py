import pytest

from pillowcurve.config import set_config
from tests.framework import Assertions


@pytest.fixture
def assert_() -> Assertions:
    return Assertions()


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the environment defaults"""
    set_config(None)
    yield
    set_config(None)
