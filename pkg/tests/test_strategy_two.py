import numpy as np
import pytest
import scipy.linalg as sla
from conftest import ANSATZ_B, SIGMA_B, fix_b_H, fix_b_theta, random_hermitian

from nipkit.errors import BlowUp, IllConditioned, NotHermitianAnsatz
from nipkit.operators import OperatorFamily, dagger, quasi_hermiticity_defect, uniform_grid
from nipkit.strategy_two import (
    HermitianAnsatz,
    hamiltonians_from_ansatz,
    integrate_dyson,
    integrate_dyson_adjoint,
    metric_from_dyson,
    run_strategy_two,
)


def const(M, grid):
    return OperatorFamily.constant(np.asarray(M, dtype=complex), grid)


class TestIntegrate:
    def test_zero_generator(self, grid):
        W = integrate_dyson(const(np.zeros((3, 3)), grid))
        assert np.abs(W.values - np.eye(3)).max() == 0.0

    def test_fix_b(self, grid):
        W = integrate_dyson(const(SIGMA_B, grid))
        assert np.linalg.norm(W[-1] - np.diag([1, np.e])) <= 1e-9
        W2 = integrate_dyson(const(SIGMA_B, grid), np.diag([2.0, 1.0]))
        assert np.linalg.norm(W2[-1] - np.diag([2, np.e])) <= 1e-9

    def test_matches_matrix_exponential(self, grid, rng):
        # constant Sigma: Omega(t) = Omega0 expm(-i Sigma t)
        S = 0.5 * random_hermitian(rng, 4) + 0.2j * random_hermitian(rng, 4)
        W0 = np.eye(4) + 0.1 * random_hermitian(rng, 4)
        W = integrate_dyson(const(S, grid), W0)
        assert np.abs(W[-1] - W0 @ sla.expm(-1j * S)).max() < 1e-11

    def test_adjoint_examples(self, grid):
        Wd = integrate_dyson_adjoint(const(np.zeros((2, 2)), grid), np.diag([1.0, 3.0]))
        assert np.abs(Wd.values - np.diag([1.0, 3.0])).max() == 0.0
        Wd = integrate_dyson_adjoint(const(SIGMA_B, grid))
        assert np.linalg.norm(Wd[-1] - np.diag([1, np.e])) <= 1e-9

    @pytest.mark.parametrize("N", [2, 5, 8])
    def test_adjoint_conjugacy(self, grid, rng, N):
        A, B = random_hermitian(rng, N), random_hermitian(rng, N)
        C = 0.3j * random_hermitian(rng, N)
        S = OperatorFamily.from_function(lambda t: A * np.cos(t) + B * t + C, grid)
        W0 = np.eye(N) + 0.2 * random_hermitian(rng, N)
        direct = integrate_dyson(S, W0)
        adj = integrate_dyson_adjoint(S, dagger(W0))
        assert np.abs(adj.values - dagger(direct.values)).max() <= 1e-8

    def test_rk4_order(self):
        def err(samples):
            g = uniform_grid(0, 1, samples)
            return np.linalg.norm(integrate_dyson(const(SIGMA_B, g))[-1] - np.diag([1, np.e]))

        e = [err(101), err(201), err(401)]
        for a, b in zip(e, e[1:]):
            assert 8 <= a / b <= 32

    def test_blow_up(self):
        g = uniform_grid(0, 1, 101)
        with pytest.raises(BlowUp):
            integrate_dyson(const(np.diag([0, 40j]), g))

    def test_ill_conditioned(self):
        g = uniform_grid(0, 1, 101)
        with pytest.raises(IllConditioned):
            integrate_dyson(const(np.diag([0, 15j]), g), cond_cap=1e6)


class TestMetricAndHamiltonian:
    def test_metric_examples(self, grid):
        metrics = metric_from_dyson(integrate_dyson(const(np.zeros((2, 2)), grid)))
        assert np.abs(np.array([m.theta for m in metrics]) - np.eye(2)).max() == 0
        W = integrate_dyson(const(SIGMA_B, grid))
        for t, m in zip(grid, metric_from_dyson(W)):
            assert np.abs(m.theta - fix_b_theta(t)).max() < 1e-9

    def test_fix_b_hamiltonian(self, grid):
        b = run_strategy_two(const(SIGMA_B, grid), const(ANSATZ_B, grid))
        for t, H in zip(grid, b.H.values):
            assert np.abs(H - fix_b_H(t)).max() < 1e-8
            exact = [-2 * np.exp(-t), 2 * np.exp(-t)]
            np.testing.assert_allclose(np.sort(np.linalg.eigvals(H).real), exact, atol=1e-8)
        assert b.passed

    def test_hermitian_limit(self, grid, rng):
        A = random_hermitian(rng, 3)
        Theta = metric_from_dyson(integrate_dyson(const(np.zeros((3, 3)), grid)))
        b = hamiltonians_from_ansatz(Theta, const(np.zeros((3, 3)), grid), HermitianAnsatz(const(A, grid)))
        assert np.abs(b.H.values - A).max() < 1e-14
        assert np.abs(b.G.values - b.H.values).max() == 0

    def test_construction_exactness(self, grid, rng):
        def sigma(t):
            return 0.4j * np.diag([0, 1, 2]) + 0.1 * t * np.ones((3, 3))

        S = OperatorFamily.from_function(sigma, grid)
        A = random_hermitian(rng, 3)
        b = run_strategy_two(S, const(A, grid))
        for H, T in zip(b.H.values, b.theta_values):
            assert quasi_hermiticity_defect(H, T) <= 1e-12 * np.linalg.cond(T)

    def test_stationary_limit(self, grid, rng):
        W0 = np.eye(3) + 0.3 * random_hermitian(rng, 3)
        b = run_strategy_two(const(np.zeros((3, 3)), grid), const(random_hermitian(rng, 3), grid), W0)
        T = b.theta_values
        assert np.abs(T - T[0]).max() <= 1e-12 * np.linalg.norm(T[0])
        assert np.abs(b.G.values - b.H.values).max() == 0

    def test_ansatz_validation(self, grid):
        bad = const([[0, 2], [2.1, 0]], grid)
        with pytest.raises(NotHermitianAnsatz):
            run_strategy_two(const(SIGMA_B, grid), bad)
        b = run_strategy_two(const(SIGMA_B, grid), HermitianAnsatz(bad, symmetrize=True))
        np.testing.assert_allclose(b.H[0], [[0, 2.05], [2.05, 0]])

    def test_flow_residual_order(self):
        def worst(samples):
            g = uniform_grid(0, 1, samples)
            return run_strategy_two(const(SIGMA_B, g), const(ANSATZ_B, g)).report("flow_identity").value

        assert worst(501) / worst(1001) == pytest.approx(4.0, rel=0.1)
