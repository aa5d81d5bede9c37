import numpy as np
import pytest
import scipy.linalg as sla
from conftest import FIX_A_H, SIGMA_B, fix_b_H, fix_b_theta, random_hermitian

from nipkit.errors import ExcessiveDrift, InitialBasisInvalid, ReferenceNotOrthonormal
from nipkit.harness.ground_truth import fix_b_ground_truth
from nipkit.operators import OperatorFamily, quasi_hermiticity_defect, uniform_grid
from nipkit.spectral import BiorthonormalSystem, extract_kappa, solve_biorthogonal
from nipkit.strategy_three import (
    coriolis_from_dyson,
    dyson_from_basis,
    evolve_basis,
    hermitian_root_reference,
    initial_dyson_alignment,
    metric_from_basis,
    propagate_hamiltonian,
    run_strategy_three,
    stationary_reference,
    textbook_reference,
)
from nipkit.strategy_two import run_strategy_two


def const(M, grid):
    return OperatorFamily.constant(np.asarray(M, dtype=complex), grid)


@pytest.fixture
def fix_b_G(grid):
    return OperatorFamily.from_function(lambda t: fix_b_H(t) - SIGMA_B, grid)


@pytest.fixture
def fix_b_initial():
    return solve_biorthogonal(fix_b_H(0.0))


def unit_hermitian_system(rng, N):
    s = solve_biorthogonal(random_hermitian(rng, N))
    return BiorthonormalSystem.from_kets(s.kets / np.linalg.norm(s.kets, axis=0), s.energies)


class TestEvolveBasis:
    def test_zero_generator(self, grid):
        s = solve_biorthogonal(FIX_A_H)
        traj = evolve_basis(const(np.zeros((2, 2)), grid), s)
        assert np.abs(traj.kets - s.kets).max() == 0 and np.abs(traj.double_kets - s.double_kets).max() == 0

    def test_hermitian_generator(self, grid, rng):
        s = unit_hermitian_system(rng, 3)
        traj = evolve_basis(const(random_hermitian(rng, 3), grid), s)
        assert np.abs(traj.kets - traj.double_kets).max() < 1e-12
        assert traj.drift.max() < 1e-10

    def test_fix_b_drift(self, fix_b_G, fix_b_initial):
        assert evolve_basis(fix_b_G, fix_b_initial).drift.max() <= 1e-8

    def test_invalid_initial(self, grid):
        bad = BiorthonormalSystem(None, np.eye(2), 2 * np.eye(2))
        with pytest.raises(InitialBasisInvalid):
            evolve_basis(const(np.zeros((2, 2)), grid), bad)

    def test_drift_order_four(self, fix_b_initial):
        def drift(samples):
            g = uniform_grid(0, 1, samples)
            G = OperatorFamily.from_function(lambda t: fix_b_H(t) - SIGMA_B, g)
            return evolve_basis(G, fix_b_initial).drift.max()

        assert drift(51) / drift(101) > 8


class TestMetricFromBasis:
    def test_constant_hermitian(self, grid, rng):
        s = unit_hermitian_system(rng, 3)
        for m in metric_from_basis(evolve_basis(const(np.zeros((3, 3)), grid), s)):
            np.testing.assert_allclose(m.theta, np.eye(3), atol=1e-14)

    def test_fix_a(self, grid):
        traj = evolve_basis(const(np.zeros((2, 2)), grid), solve_biorthogonal(FIX_A_H))
        for m in metric_from_basis(traj, [2, 2]):
            np.testing.assert_allclose(m.theta, np.diag([1, 4]), atol=1e-14)

    def test_fix_b(self, grid, fix_b_G, fix_b_initial):
        kappa = extract_kappa(fix_b_initial, np.eye(2))
        for t, m in zip(grid, metric_from_basis(evolve_basis(fix_b_G, fix_b_initial), kappa)):
            assert np.linalg.norm(m.theta - fix_b_theta(t)) <= 1e-7 * np.linalg.norm(fix_b_theta(t))

    def test_excessive_drift(self, fix_b_G, fix_b_initial):
        with pytest.raises(ExcessiveDrift):
            metric_from_basis(evolve_basis(fix_b_G, fix_b_initial), max_drift=1e-20)


class TestDyson:
    def test_fix_a_factorization(self, grid):
        traj = evolve_basis(const(np.zeros((2, 2)), grid), solve_biorthogonal(FIX_A_H))
        W = dyson_from_basis(traj, [2, 2]).Omega
        for w in W.values:
            np.testing.assert_allclose(w.conj().T @ w, np.diag([1, 4]), atol=1e-14)

    def test_fix_b_factorization(self, grid, fix_b_G, fix_b_initial):
        W = dyson_from_basis(evolve_basis(fix_b_G, fix_b_initial), [2, 2]).Omega
        for t, w in zip(grid, W.values):
            assert np.abs(w.conj().T @ w - fix_b_theta(t)).max() < 1e-9 * np.exp(2 * t)

    def test_reference_must_be_orthonormal(self, grid, fix_b_G, fix_b_initial):
        with pytest.raises(ReferenceNotOrthonormal):
            dyson_from_basis(evolve_basis(fix_b_G, fix_b_initial), None, 2 * np.eye(2))

    def test_coriolis_examples(self, grid, rng):
        assert np.abs(coriolis_from_dyson(const(np.diag([1.0, 2.0]), grid)).values).max() == 0
        W = OperatorFamily.from_function(lambda t: np.diag([1.0, np.exp(t)]), grid)
        assert np.abs(coriolis_from_dyson(W).values - SIGMA_B).max() < 1e-6
        K = random_hermitian(rng, 3)
        W = OperatorFamily.from_function(lambda t: sla.expm(-1j * K * t), grid)
        assert np.abs(coriolis_from_dyson(W, order=4).values - K).max() < 1e-9

    def test_constant_reference_freezes_mapped_states(self, fix_b_G, fix_b_initial):
        b = run_strategy_three(fix_b_G, fix_b_initial, [2, 2], derivative_order=4)
        assert np.abs(b.Sigma.values + fix_b_G.values).max() < 1e-8
        assert np.abs(b.H.values).max() < 1e-8


class TestPropagatedHamiltonian:
    def test_examples(self, grid, rng):
        traj = evolve_basis(const(np.zeros((2, 2)), grid), solve_biorthogonal(FIX_A_H))
        assert np.abs(propagate_hamiltonian(traj, [0, 0]).values).max() == 0
        np.testing.assert_allclose(propagate_hamiltonian(traj, [2, -2]).values[-1], FIX_A_H, atol=1e-14)
        s = unit_hermitian_system(rng, 2)
        H = propagate_hamiltonian(evolve_basis(const(np.zeros((2, 2)), grid), s), [1, 2])
        np.testing.assert_allclose(H[0], s.kets @ np.diag([1, 2]) @ s.kets.conj().T, atol=1e-14)

    def test_quasi_hermiticity(self, fix_b_G, fix_b_initial):
        traj = evolve_basis(fix_b_G, fix_b_initial)
        Theta = metric_from_basis(traj, [2, 2])
        H = propagate_hamiltonian(traj, fix_b_initial.energies)
        assert max(quasi_hermiticity_defect(h, m) for h, m in zip(H.values, Theta)) <= 1e-7


class TestRun:
    def test_zero_generator(self, grid):
        b = run_strategy_three(const(np.zeros((2, 2)), grid), solve_biorthogonal(FIX_A_H), [2, 2])
        assert np.abs(b.Sigma.values).max() == 0 and np.abs(b.H.values).max() == 0
        T = b.theta_values
        assert np.abs(T - T[0]).max() == 0

    def test_heisenberg_limit(self, grid):
        # G = 0 with a rotating auxiliary basis: all the dynamics sit in Sigma = H
        s = solve_biorthogonal(FIX_A_H)
        b = run_strategy_three(const(np.zeros((2, 2)), grid), s, [2, 2], "stationary", derivative_order=4)
        assert np.abs(b.H.values - b.Sigma.values).max() == 0
        assert np.abs(b.H.values - FIX_A_H).max() < 1e-9

    def test_fix_b_textbook_reference(self, grid, fix_b_G, fix_b_initial):
        truth = fix_b_ground_truth(grid)
        kappa = extract_kappa(fix_b_initial, np.eye(2))
        U0 = initial_dyson_alignment(fix_b_initial, kappa, np.eye(2))
        for order in (2, 4):
            b = run_strategy_three(fix_b_G, fix_b_initial, kappa, textbook_reference(truth.hbar, U0),
                                   derivative_order=order)
            assert np.abs(b.Sigma.values - SIGMA_B).max() <= 1e-6
            for t, H in zip(grid, b.H.values):
                assert np.abs(H - fix_b_H(t)).max() <= 1e-6
            assert b.passed

    def test_hermitian_root_reference(self, grid, fix_b_G, fix_b_initial):
        # Omega = Theta^{1/2} = diag(1, e^t) is also the FIX-B Dyson map
        b = run_strategy_three(fix_b_G, fix_b_initial, [2, 2], "hermitian_root", derivative_order=4)
        assert np.abs(b.Sigma.values - SIGMA_B).max() < 1e-8

    def test_matches_strategy_two_metric(self, grid, rng):
        S = OperatorFamily.from_function(lambda t: 0.3j * np.diag([0, 1, -1]) + 0.2 * t * np.eye(3), grid)
        two = run_strategy_two(S, const(np.diag([1.0, 2.0, 3.5]) + 0.2 * random_hermitian(rng, 3), grid))
        initial = solve_biorthogonal(two.H[0])
        kappa = extract_kappa(initial, two.Theta[0])
        three = run_strategy_three(two.G, initial, kappa)
        for a, b in zip(three.theta_values, two.theta_values):
            assert np.linalg.norm(a - b) <= 1e-6 * np.linalg.norm(b)
        assert three.report("gauge_consistency").value <= 1e-9

    def test_stationary_reference_values(self, grid):
        R = stationary_reference(grid, [1.0, -2.0])
        np.testing.assert_allclose(R.at(0.5), np.diag(np.exp(-1j * np.array([1.0, -2.0]) * 0.5)))

    def test_hermitian_root_reference_is_unitary(self, fix_b_G, fix_b_initial):
        R = hermitian_root_reference(evolve_basis(fix_b_G, fix_b_initial), [2, 2])
        assert max(np.abs(r.conj().T @ r - np.eye(2)).max() for r in R.values) < 1e-12
