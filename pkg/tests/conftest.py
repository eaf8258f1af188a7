"""pytest 共享夹具"""

import pytest

from gfcalc.config import overridden
from gfcalc.services.asymptotics import default_grid
from gfcalc.services.mollifier import make_schedule


@pytest.fixture(scope="session")
def grid():
    """完整网格 k = 1..40"""
    return default_grid(1, 40)


@pytest.fixture(scope="session")
def short_grid():
    """较短网格 k = 1..16，用于求积较重的测试"""
    return default_grid(1, 16)


@pytest.fixture(scope="session")
def schedule():
    return make_schedule()


@pytest.fixture
def single_thread():
    with overridden(runtime={"threads": 1}) as cfg:
        yield cfg
