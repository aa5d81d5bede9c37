"""States, observables and predictions.

Kets follow ``i d|psi>/dt = G|psi>``, double-kets ``i d|psi>>/dt = G^+|psi>>``
and observables the Heisenberg-type flow ``i dQ/dt = Q Sigma - Sigma Q``.
Predictions are the normalized matrix elements ``<<psi|L|psi> / <<psi|psi>``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import ModelBundle
from .errors import DimensionMismatch, VanishingOverlap
from .ode import rk4
from .operators import Metric, OperatorFamily, ResidualReport, as_operator, dagger, invert

__all__ = [
    "StatePair",
    "Observable",
    "evolve_state",
    "evolve_costate",
    "evolve_observable",
    "expectation",
    "physical_norm",
    "hermitian_frame_check",
    "physical_unitarity",
    "pairing_drift",
]


@dataclass(frozen=True, eq=False)
class StatePair:
    ket: np.ndarray
    double_ket: np.ndarray
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class Observable:
    """An observable, either a family ``Lambda(t)`` or a conserved operator."""

    Lambda: object
    label: str = ""

    def at_sample(self, k: int) -> np.ndarray:
        if isinstance(self.Lambda, OperatorFamily):
            return self.Lambda[k]
        return np.asarray(self.Lambda, dtype=complex)


def _vector(v, dim=None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if dim is not None and v.size != dim:
        raise DimensionMismatch(f"vector of length {v.size} for dimension {dim}")
    if not np.any(v):
        raise ValueError("initial vector must be nonzero")
    return v


def evolve_state(G: OperatorFamily, psi0, steps_per_sample: int = 1) -> np.ndarray:
    """Kets on the grid of ``G``, shape ``(M+1, N)``."""
    psi0 = _vector(psi0, G.dim)
    return rk4(lambda t, y: -1j * (G.at(t) @ y), psi0, G.grid, steps_per_sample)


def evolve_costate(G: OperatorFamily, psi0_double, steps_per_sample: int = 1) -> np.ndarray:
    """Double-kets on the grid of ``G``, evolved by ``G^+``."""
    d0 = _vector(psi0_double, G.dim)
    return rk4(lambda t, y: -1j * (dagger(G.at(t)) @ y), d0, G.grid, steps_per_sample)


def evolve_observable(Q0, Sigma: OperatorFamily, steps_per_sample: int = 1) -> OperatorFamily:
    """Solve ``i dQ/dt = Q Sigma - Sigma Q`` from ``Q(t_0) = Q0``."""
    Q0 = as_operator(Q0, Sigma.dim)

    def rhs(t, Q):
        s = Sigma.at(t)
        return -1j * (Q @ s - s @ Q)

    return OperatorFamily(Sigma.grid, rk4(rhs, Q0, Sigma.grid, steps_per_sample))


def expectation(state: StatePair, Lambda, tol: float = 1e-12) -> complex:
    """``<<psi|Lambda|psi> / <<psi|psi>``."""
    k, d = state.ket, state.double_ket
    L = np.asarray(Lambda, dtype=complex)
    if L.shape != (k.size, k.size) or d.size != k.size:
        raise DimensionMismatch("state and observable dimensions differ")
    norm = np.vdot(d, k)
    if abs(norm) < tol * np.linalg.norm(d) * np.linalg.norm(k):
        raise VanishingOverlap(f"<<psi|psi> = {norm:.3e}")
    return complex(np.vdot(d, L @ k) / norm)


def physical_norm(ket, theta) -> float:
    """``sqrt(<psi|Theta|psi>)``."""
    T = theta.theta if isinstance(theta, Metric) else np.asarray(theta)
    k = np.asarray(ket, dtype=complex).reshape(-1)
    return float(np.sqrt(np.real(np.vdot(k, T @ k))))


def physical_unitarity(
    bundle: ModelBundle, psi0, steps_per_sample: int = 1, tol: float = 1e-8
) -> ResidualReport:
    """Largest relative change of the physical norm along a ``G``-trajectory."""
    psi = evolve_state(bundle.G, psi0, steps_per_sample)
    norms = np.array([physical_norm(p, t) for p, t in zip(psi, bundle.Theta)])
    return ResidualReport("physical_unitarity", float(np.max(np.abs(norms - norms[0])) / norms[0]), tol)


def pairing_drift(
    G: OperatorFamily, psi0, phi0_double, steps_per_sample: int = 1, tol: float = 1e-8
) -> ResidualReport:
    """Largest change of ``<<phi(t)|psi(t)>`` for a ket evolved by ``G`` and a double-ket by ``G^+``."""
    psi = evolve_state(G, psi0, steps_per_sample)
    phi = evolve_costate(G, phi0_double, steps_per_sample)
    overlap = np.einsum("ki,ki->k", np.conj(phi), psi)
    value = float(np.max(np.abs(overlap - overlap[0])) / max(1.0, abs(overlap[0])))
    return ResidualReport("pairing_drift", value, tol)


def hermitian_frame_check(
    bundle: ModelBundle, Lambda, psi0, steps_per_sample: int = 1, tol: float = 1e-6
) -> ResidualReport:
    """Compare the NIP prediction with its image in the trivial-metric frame.

    The ket evolves under ``G`` and its partner double-ket, started at
    ``Theta(t_0)|psi_0>``, under ``G^+``.  At each sample the prediction is
    compared with the expectation of ``Omega Lambda Omega^{-1}`` in the mapped
    state ``Omega|psi>`` under the ordinary inner product.
    """
    obs = Lambda if isinstance(Lambda, Observable) else Observable(Lambda)
    psi0 = _vector(psi0, bundle.G.dim)
    psi = evolve_state(bundle.G, psi0, steps_per_sample)
    dual = evolve_costate(bundle.G, bundle.Theta[0].theta @ psi0, steps_per_sample)
    worst = 0.0
    for k, W in enumerate(bundle.Omega.values):
        L = obs.at_sample(k)
        nip = expectation(StatePair(psi[k], dual[k], bundle.grid[k]), L)
        phi = W @ psi[k]
        lam = W @ L @ invert(W)
        textbook = np.vdot(phi, lam @ phi) / np.vdot(phi, phi)
        worst = max(worst, abs(nip - textbook) / max(1.0, abs(textbook)))
    name = f"frame_equivalence[{obs.label}]" if obs.label else "frame_equivalence"
    return ResidualReport(name, float(worst), tol)
