"""Canonical 2x2 fixtures with closed-form answers."""
from __future__ import annotations

import numpy as np

from ..operators import OperatorFamily, uniform_grid
from ..spectral import extract_kappa, solve_biorthogonal
from ..strategy_three import initial_dyson_alignment, textbook_reference
from .ground_truth import GroundTruthBundle, fix_b_ground_truth
from .scenario import Scenario

__all__ = [
    "FIX_A_H",
    "FIX_A_THETA",
    "FIX_A_OMEGA",
    "FIX_B_SIGMA",
    "FIX_B_ANSATZ",
    "fix_a_ground_truth",
    "fixture_FIX_A",
    "fixture_FIX_B",
    "fixture_FIX_B_three",
    "FIXTURES",
    "get_fixture",
]

FIX_A_H = np.array([[0, 4], [1, 0]], dtype=complex)
FIX_A_THETA = np.diag([1.0, 4.0]).astype(complex)
FIX_A_OMEGA = np.diag([1.0, 2.0]).astype(complex)
FIX_A_KAPPA = np.array([2.0, 2.0])
FIX_B_SIGMA = np.diag([0, 1j])
FIX_B_ANSATZ = np.array([[0, 2], [2, 0]], dtype=complex)


def fix_a_ground_truth(grid) -> GroundTruthBundle:
    """Stationary fixture: ``hbar = 2 sigma_x``, ``Omega = diag(1, 2)``."""
    hbar = np.array([[0, 2], [2, 0]], dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    return GroundTruthBundle.from_maps(grid, lambda t: hbar, lambda t: (FIX_A_OMEGA, zero))


def fixture_FIX_A(samples: int = 101) -> Scenario:
    """Constant ``H = [[0, 4], [1, 0]]`` with ``kappa = (2, 2)``, run through strategy one."""
    grid = uniform_grid(0.0, 1.0, samples)
    return Scenario(
        name="FIX-A",
        dim=2,
        grid=grid,
        input_kind="one",
        payload={"H": OperatorFamily.constant(FIX_A_H, grid)},
        kappa=FIX_A_KAPPA.copy(),
        observables=[("H", "H"), ("sigma_z", OperatorFamily.constant(np.diag([1.0, -1.0]), grid))],
        truth=fix_a_ground_truth(grid),
        compare=("theta", "sigma", "H"),
        description="stationary 2x2 model, metric diag(1, 4)",
    )


def fixture_FIX_B(samples: int = 1001) -> Scenario:
    """``Sigma = i diag(0, 1)``, ``A = 2 sigma_x``, ``Omega_0 = I``, run through strategy two."""
    grid = uniform_grid(0.0, 1.0, samples)
    return Scenario(
        name="FIX-B",
        dim=2,
        grid=grid,
        input_kind="two",
        payload={
            "Sigma": OperatorFamily.constant(FIX_B_SIGMA, grid),
            "A": OperatorFamily.constant(FIX_B_ANSATZ, grid),
            "Omega0": np.eye(2, dtype=complex),
        },
        observables=[("H", "H"), ("sigma_x", OperatorFamily.constant(np.array([[0, 1], [1, 0]]), grid))],
        truth=fix_b_ground_truth(grid),
        compare=("theta", "sigma", "H"),
        description="non-stationary 2x2 model, metric diag(1, e^{2t})",
    )


def fixture_FIX_B_three(samples: int = 1001) -> Scenario:
    """Generator of FIX-B run through strategy three with the textbook auxiliary basis."""
    grid = uniform_grid(0.0, 1.0, samples)
    truth = fix_b_ground_truth(grid)
    initial = solve_biorthogonal(truth.H[0])
    kappa = extract_kappa(initial, truth.Theta[0])
    U0 = initial_dyson_alignment(initial, kappa, truth.Omega[0])
    return Scenario(
        name="FIX-B-three",
        dim=2,
        grid=grid,
        input_kind="three",
        payload={"G": truth.G, "initial": initial, "reference": textbook_reference(truth.hbar, U0)},
        kappa=kappa,
        observables=[("H", "H")],
        derivative_order=4,
        truth=truth,
        compare=("theta", "sigma", "H"),
        description="generator of FIX-B, Coriolis operator recovered from evolved biorthonormal basis",
    )


FIXTURES = {
    "FIX-A": fixture_FIX_A,
    "FIX-B": fixture_FIX_B,
    "FIX-B-three": fixture_FIX_B_three,
}


def get_fixture(name: str) -> Scenario:
    key = {k.lower(): k for k in FIXTURES}.get(name.lower().replace("_", "-"))
    if key is None:
        raise KeyError(name)
    return FIXTURES[key]()
