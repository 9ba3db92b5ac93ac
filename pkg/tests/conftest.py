import numpy as np
import pytest

from src.exp_sums import gauss_all
from src.finite_field import build_field

SEED = 123

SMALL_FIELDS = [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1)]


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)  # fixed seed for reproducibility


@pytest.fixture
def f5():
    return build_field(5)


@pytest.fixture
def f7():
    return build_field(7)


@pytest.fixture
def f9():
    return build_field(3, 2)


@pytest.fixture
def f11():
    return build_field(11)


@pytest.fixture
def f13():
    return build_field(13)


@pytest.fixture(params=SMALL_FIELDS, ids=lambda pr: f"q{pr[0] ** pr[1]}")
def small_field(request):
    return build_field(*request.param)


@pytest.fixture
def gauss13(f13):
    return gauss_all(f13)
