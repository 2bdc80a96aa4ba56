import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from radial.grid import make_radial_grid  # noqa: E402


@pytest.fixture(scope="session")
def grid3():
    """N = 3, 100 uniform nodes."""
    return make_radial_grid(3, 100)


@pytest.fixture(scope="session")
def grid5():
    """N = 5, 100 uniform nodes."""
    return make_radial_grid(5, 100)


@pytest.fixture(scope="session")
def grid7():
    """N = 7, 100 uniform nodes."""
    return make_radial_grid(7, 100)
