import numpy as np
import pytest
from conftest import ANSATZ_B, FIX_A_H, SIGMA_B, fix_b_H, random_hermitian

from nipkit.errors import VanishingOverlap
from nipkit.evolution import (
    Observable,
    StatePair,
    evolve_costate,
    evolve_observable,
    evolve_state,
    expectation,
    hermitian_frame_check,
    pairing_drift,
    physical_norm,
    physical_unitarity,
)
from nipkit.operators import OperatorFamily, uniform_grid
from nipkit.spectral import solve_biorthogonal
from nipkit.strategy_one import run_strategy_one
from nipkit.strategy_two import run_strategy_two


def const(M, grid):
    return OperatorFamily.constant(np.asarray(M, dtype=complex), grid)


@pytest.fixture
def fix_b_bundle(grid):
    return run_strategy_two(const(SIGMA_B, grid), const(ANSATZ_B, grid))


@pytest.fixture
def fix_a_bundle():
    g = uniform_grid(0, 1, 101)
    return run_strategy_one(const(FIX_A_H, g), kappa=[2, 2])


class TestStates:
    def test_zero_generator(self, grid):
        psi = evolve_state(const(np.zeros((2, 2)), grid), [1, 2j])
        assert np.abs(psi - [1, 2j]).max() == 0
        assert np.abs(evolve_costate(const(np.zeros((2, 2)), grid), [1, 2j]) - [1, 2j]).max() == 0

    def test_scalar_exponential(self, grid):
        psi = evolve_state(const(np.diag([1.0, 2.0]), grid), [1, 0])
        assert np.abs(psi[-1] - [np.exp(-1j), 0]).max() <= 1e-9

    def test_hermitian_costate_matches_state(self, grid, rng):
        G = const(random_hermitian(rng, 3), grid)
        psi0 = rng.standard_normal(3) + 0j
        assert np.abs(evolve_state(G, psi0) - evolve_costate(G, psi0)).max() == 0

    def test_fix_b_physical_norm(self, fix_b_bundle):
        ket = solve_biorthogonal(fix_b_H(0.0)).kets[:, 0]
        assert physical_unitarity(fix_b_bundle, ket).value <= 1e-8

    def test_fix_b_pairing(self, fix_b_bundle, rng):
        for _ in range(3):
            psi0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            phi0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            assert pairing_drift(fix_b_bundle.G, psi0, phi0).value <= 1e-8

    def test_rejects_zero_vector(self, grid):
        with pytest.raises(ValueError):
            evolve_state(const(np.eye(2), grid), [0, 0])


class TestObservables:
    def test_zero_coriolis(self, grid):
        Q0 = np.array([[1, 2], [3, 4]], dtype=complex)
        assert np.abs(evolve_observable(Q0, const(np.zeros((2, 2)), grid)).values - Q0).max() == 0

    def test_commuting(self, grid):
        Q0 = np.diag([1.0, 5.0])
        assert np.abs(evolve_observable(Q0, const(SIGMA_B, grid)).values - Q0).max() < 1e-15

    def test_fix_b_closed_form(self, grid):
        a, b, c, d = 1.5, 2 - 1j, 0.5j, -3.0
        Q = evolve_observable([[a, b], [c, d]], const(SIGMA_B, grid))
        np.testing.assert_allclose(Q[-1], [[a, b * np.e], [c / np.e, d]], atol=1e-8)
        ev0 = np.sort_complex(np.linalg.eigvals([[a, b], [c, d]]))
        for q in Q.values:
            assert np.abs(np.sort_complex(np.linalg.eigvals(q)) - ev0).max() <= 1e-7


class TestExpectation:
    def test_identity(self, rng):
        k, d = rng.standard_normal(3) + 0j, rng.standard_normal(3) + 0j
        assert expectation(StatePair(k, d), np.eye(3)) == pytest.approx(1.0)

    def test_fix_a_eigenpair(self):
        s = solve_biorthogonal(FIX_A_H)
        assert expectation(StatePair(s.kets[:, 0], s.double_kets[:, 0]), FIX_A_H) == pytest.approx(2.0)

    def test_hermitian_limit(self, rng):
        L = random_hermitian(rng, 3)
        psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        val = expectation(StatePair(psi, psi), L)
        assert abs(val.imag) < 1e-14
        assert val.real == pytest.approx(np.vdot(psi, L @ psi).real / np.vdot(psi, psi).real)

    def test_quasi_hermitian_is_real(self, fix_b_bundle, rng):
        k = 400
        psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        T = fix_b_bundle.Theta[k].theta
        val = expectation(StatePair(psi, T @ psi), fix_b_bundle.H[k])
        assert abs(val.imag) <= 1e-9

    def test_vanishing_overlap(self):
        with pytest.raises(VanishingOverlap):
            expectation(StatePair(np.array([1, 0j]), np.array([0, 1j])), np.eye(2))

    def test_physical_norm(self):
        assert physical_norm([1, 0], np.eye(2)) == 1.0
        assert physical_norm([0, 1], np.diag([1.0, 4.0])) == pytest.approx(2.0)
        assert physical_norm([1, 1], np.diag([1.0, 4.0])) == pytest.approx(np.sqrt(5))


class TestFrameCheck:
    def test_fix_a_eigenvalue(self, fix_a_bundle):
        ket = solve_biorthogonal(FIX_A_H).kets[:, 0]
        assert hermitian_frame_check(fix_a_bundle, FIX_A_H, ket).value <= 1e-10

    def test_identity(self, fix_b_bundle):
        assert hermitian_frame_check(fix_b_bundle, np.eye(2), [1, 1j]).value <= 1e-15

    def test_fix_b_hamiltonian(self, fix_b_bundle):
        r = hermitian_frame_check(fix_b_bundle, Observable(fix_b_bundle.H, "H"), [1, 0.3])
        assert r.value <= 1e-6 and r.name == "frame_equivalence[H]"

    def test_mapped_hamiltonian_hermitian(self, fix_b_bundle):
        assert fix_b_bundle.report("frame_hermiticity").value <= 1e-8
