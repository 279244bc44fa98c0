import warnings

import pytest

from relu_landscape import data
from relu_landscape._seeds import stream


def pytest_configure(config):
    # cvxpy warns when an interior-point run falls short of an over-tight
    # tolerance request; optimality is certified independently downstream.
    warnings.filterwarnings("ignore", message="Solution may be inaccurate")


@pytest.fixture(scope="session")
def gaussian_4x2():
    return data.gen_gaussian_teacher(4, 2, teacher_width=10, seed=20240)


@pytest.fixture(scope="session")
def orthogonal_8x20():
    rng = stream(77, "teacher")
    teacher = data.random_teacher(20, 10, rng)
    return data.gen_orthogonal(8, 20, teacher, seed=77)


@pytest.fixture(scope="session")
def assumption1_d3():
    return data.gen_assumption1(3, seed=5)


def make_orthogonal(n, d, seed, teacher_width=10):
    rng = stream(seed, "teacher")
    teacher = data.random_teacher(d, teacher_width, rng)
    return data.gen_orthogonal(n, d, teacher, seed)
