import math

import numpy as np
import pytest

from diracspec.bcond import preset
from diracspec.potential import POTENTIAL_PRESETS, ZERO_POTENTIAL, build_mesh


@pytest.fixture
def separated():
    return preset("separated")


@pytest.fixture
def periodic():
    return preset("periodic")


@pytest.fixture
def antiperiodic():
    return preset("antiperiodic")


@pytest.fixture
def zero():
    return ZERO_POTENTIAL


@pytest.fixture
def offdiag_one():
    return POTENTIAL_PRESETS["offdiag-one"]


@pytest.fixture
def smooth():
    return POTENTIAL_PRESETS["smooth"]


@pytest.fixture
def smooth_mesh(smooth):
    return build_mesh(smooth, cells=256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def free_exponential():
    """
    E(x, lam) for the zero potential.
    """
    return lambda lam, x: np.diag([np.exp(1j * lam * x), np.exp(-1j * lam * x)])


@pytest.fixture
def separated_eigenfunction():
    """
    Normalized eigenfunctions of the zero potential with separated conditions.
    """
    def value(n, x):
        x = np.asarray(x, dtype=float)
        return np.array([np.exp(1j * n * x), -np.exp(-1j * n * x)]) / math.sqrt(2 * math.pi)

    return value
