import numpy as np
import pytest

from iumps import RandomStream, build_instance

MASTER_SEED = 20240817


@pytest.fixture(scope="session")
def case1_instance():
    return build_instance("case1", 3, 4, RandomStream(MASTER_SEED, 0))


@pytest.fixture(scope="session")
def case2_instance():
    return build_instance("case2", 3, 4, RandomStream(MASTER_SEED, 1))


@pytest.fixture(scope="session")
def case3_instance():
    return build_instance("case3", 3, 4, RandomStream(MASTER_SEED, 2))


def assert_close(actual, expected, tol, label=""):
    dev = float(np.abs(np.asarray(actual) - np.asarray(expected)).max())
    assert dev <= tol, f"{label}: deviation {dev:.3e} exceeds {tol:.1e}"
