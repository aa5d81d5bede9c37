import numpy as np
import pytest
from hypothesis import settings

from nipkit.operators import OperatorFamily, uniform_grid

settings.register_profile("nipkit", max_examples=40, deadline=None)
settings.load_profile("nipkit")

FIX_A_H = np.array([[0, 4], [1, 0]], dtype=complex)
SIGMA_B = np.diag([0, 1j])
ANSATZ_B = np.array([[0, 2], [2, 0]], dtype=complex)


def fix_b_H(t):
    return np.array([[0, 2], [2 * np.exp(-2 * t), 0]], dtype=complex)


def fix_b_theta(t):
    return np.diag([1.0, np.exp(2 * t)]).astype(complex)


@pytest.fixture
def grid():
    return uniform_grid(0.0, 1.0, 1001)


@pytest.fixture
def fix_b_H_family(grid):
    return OperatorFamily.from_function(fix_b_H, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def random_matrix(rng, N):
    return rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))


def random_hermitian(rng, N):
    X = random_matrix(rng, N)
    return 0.5 * (X + X.conj().T)
