import numpy as np
import pytest
import scipy.linalg as sla
from conftest import FIX_A_H, random_hermitian, random_matrix
from hypothesis import given
from hypothesis import strategies as st

from nipkit.errors import DimensionMismatch, GridTooShort, IllConditioned, NonUniformGrid, NotPositiveDefinite
from nipkit.operators import (
    OperatorFamily,
    ResidualReport,
    assert_metric,
    derivative_family,
    fd_weights,
    hermitian_sqrt,
    hermiticity_defect,
    invert,
    quasi_hermiticity_defect,
    time_derivative,
    uniform_grid,
)


class TestDefects:
    def test_identity_is_hermitian(self):
        for N in (1, 3, 7):
            assert hermiticity_defect(np.eye(N)) == 0.0

    def test_fix_a_hermiticity_defect(self):
        # M - M^+ = [[0, 3], [-3, 0]]; ||.|| = 3 sqrt(2), ||M|| = sqrt(17)
        assert hermiticity_defect(FIX_A_H) == pytest.approx(3 * np.sqrt(2) / np.sqrt(17), rel=1e-14)
        assert hermiticity_defect(FIX_A_H) == pytest.approx(1.0290, abs=1e-4)

    def test_real_symmetric(self):
        assert hermiticity_defect([[0, 2], [2, 0]]) == 0.0

    def test_quasi_hermiticity(self, rng):
        h = random_hermitian(rng, 4)
        assert quasi_hermiticity_defect(h, np.eye(4)) == pytest.approx(0.0, abs=1e-15)
        assert quasi_hermiticity_defect(FIX_A_H, np.diag([1.0, 4.0])) == 0.0
        assert quasi_hermiticity_defect(FIX_A_H, np.eye(2)) > 0.5

    def test_quasi_reduces_to_plain_defect(self, rng):
        for N in (2, 5):
            M = random_matrix(rng, N)
            assert quasi_hermiticity_defect(M, np.eye(N)) == hermiticity_defect(M)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            quasi_hermiticity_defect(np.eye(2), np.eye(3))


class TestMetric:
    def test_diagonal(self):
        m = assert_metric(np.diag([1.0, 4.0]), eps=1e-10)
        assert m.pd_margin == pytest.approx(1.0)

    def test_identity(self):
        assert assert_metric(np.eye(3)).pd_margin == pytest.approx(1.0)

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            assert_metric(np.diag([1.0, -1.0]))

    def test_sqrt_examples(self):
        np.testing.assert_allclose(hermitian_sqrt(np.diag([1.0, 4.0])), np.diag([1.0, 2.0]), atol=1e-15)
        np.testing.assert_allclose(hermitian_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
        T = np.array([[2.0, 1.0], [1.0, 2.0]])
        W = hermitian_sqrt(T)
        np.testing.assert_allclose(W @ W, T, atol=1e-14)
        # independent oracle: Schur-based square root
        np.testing.assert_allclose(W, sla.sqrtm(T), atol=1e-13)

    @given(st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_metric_and_sqrt_roundtrip(self, N, seed):
        rng = np.random.default_rng(seed)
        X = random_matrix(rng, N)
        W = hermitian_sqrt(X @ X.conj().T + N * np.eye(N))
        m = assert_metric(W @ W)
        assert hermiticity_defect(m.theta) <= 1e-10
        assert np.all(np.linalg.eigvalsh(m.theta) > 0)
        assert np.linalg.norm(hermitian_sqrt(m) - W) <= 1e-10 * np.linalg.norm(W)


class TestInvert:
    def test_examples(self):
        np.testing.assert_allclose(invert(np.diag([1.0, 2.0])), np.diag([1.0, 0.5]))
        np.testing.assert_allclose(invert(np.eye(3)), np.eye(3))
        np.testing.assert_allclose(invert(FIX_A_H), [[0, 1], [0.25, 0]])

    def test_condition_cap(self):
        with pytest.raises(IllConditioned) as info:
            invert(np.diag([1.0, 1e-14]))
        assert info.value.condition > 1e12


class TestFamily:
    def test_rejects_nonuniform_grid(self):
        with pytest.raises(NonUniformGrid):
            OperatorFamily(np.array([0.0, 0.1, 0.3]), np.zeros((3, 2, 2)))

    def test_uniform_grid(self):
        g = uniform_grid(0.0, 1.0, 11)
        assert g.size == 11 and g[-1] == 1.0

    def test_interpolation_uses_closed_form(self, grid):
        F = OperatorFamily.from_function(lambda t: np.diag([1.0, np.exp(t)]), grid)
        np.testing.assert_allclose(F.at(0.12345), np.diag([1.0, np.exp(0.12345)]), rtol=1e-15)

    def test_spline_interpolation(self, grid):
        F = OperatorFamily.from_function(lambda t: np.diag([1.0, np.exp(t)]), grid)
        G = OperatorFamily(grid, F.values)
        assert np.abs(G.at(0.12345) - F.at(0.12345)).max() < 1e-12

    def test_algebra(self, grid):
        A = OperatorFamily.constant(np.eye(2), grid)
        B = OperatorFamily.from_function(lambda t: t * np.eye(2), grid)
        np.testing.assert_allclose((A + B).at(0.5), 1.5 * np.eye(2))
        np.testing.assert_allclose((A - B).values[-1], np.zeros((2, 2)))
        np.testing.assert_allclose(OperatorFamily.constant(FIX_A_H, grid).dagger()[3], FIX_A_H.T)


class TestTimeDerivative:
    def test_fd_weights(self):
        np.testing.assert_allclose(fd_weights([-1, 0, 1]), [-0.5, 0, 0.5], atol=1e-15)
        np.testing.assert_allclose(fd_weights([0, 1, 2]), [-1.5, 2, -0.5], atol=1e-14)
        expected = [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]
        np.testing.assert_allclose(fd_weights([-2, -1, 0, 1, 2]), expected, atol=1e-14)

    def test_constant(self, grid):
        F = OperatorFamily.constant(np.arange(4.0).reshape(2, 2), grid)
        assert np.abs(derivative_family(F).values).max() == 0.0

    def test_linear_is_exact(self, grid):
        F = OperatorFamily.from_function(lambda t: t * np.eye(3), grid)
        for order in (2, 4):
            dF = derivative_family(F, order).values
            assert np.abs(dF - np.eye(3)).max() < 1e-10
            np.testing.assert_allclose(time_derivative(F, 0, order), np.eye(3), atol=1e-10)

    def test_exponential(self, grid):
        F = OperatorFamily.from_function(lambda t: np.diag([1.0, np.exp(t)]), grid)
        dF = derivative_family(F).values
        exact = np.array([np.diag([0.0, np.exp(t)]) for t in grid])
        # central error h^2 e^t / 6, one-sided h^2 e^t / 3
        assert np.abs(dF - exact).max() < 1e-6
        for k in (0, 500, 1000):
            np.testing.assert_allclose(time_derivative(F, k), dF[k], atol=1e-15)

    def test_second_order_convergence(self):
        def err(samples):
            g = uniform_grid(0.0, 1.0, samples)
            F = OperatorFamily.from_function(lambda t: np.diag([1.0, np.exp(t)]), g)
            exact = np.array([np.diag([0.0, np.exp(t)]) for t in g])
            return np.abs(derivative_family(F).values - exact).max()

        assert err(501) / err(1001) == pytest.approx(4.0, rel=0.1)

    def test_too_short(self):
        F = OperatorFamily(uniform_grid(0, 1, 2), np.zeros((2, 2, 2)))
        with pytest.raises(GridTooShort):
            derivative_family(F)


def test_residual_report():
    r = ResidualReport("x", 1e-9, 1e-8)
    assert r.passed and str(r).startswith("PASS x")
    assert not ResidualReport("x", float("nan"), 1.0).passed
    expected = {"name": "y", "value": 2.0, "tolerance": 1.0, "passed": False}
    assert ResidualReport("y", 2.0, 1.0).as_dict() == expected
