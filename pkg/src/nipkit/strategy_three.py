"""Reconstruction from a given Schroedinger generator ``G(t)``.

Kets evolve under ``G`` and double-kets under ``G^+`` from a biorthonormal
basis at ``t_0``.  The metric is the dyadic sum over the evolved double-kets
and the Dyson map is written against an auxiliary orthonormal basis
``|psi_n(t)>'``:

    Omega(t) = sum_n |psi_n(t)>' sqrt(kappa_n) <<psi_n(t)|

The auxiliary basis fixes the gauge and therefore ``Sigma`` and ``H``.  A
constant auxiliary basis freezes the mapped states, which forces
``Sigma = -G`` and ``H = 0``.  Time-dependent choices are built by
:func:`stationary_reference`, :func:`textbook_reference` and
:func:`hermitian_root_reference`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import FD_TOLERANCES, DysonTrajectory, ModelBundle, bundle_diagnostics, merged_tolerances
from .errors import (
    DimensionMismatch,
    ExcessiveDrift,
    InitialBasisInvalid,
    ReferenceNotOrthonormal,
)
from .ode import rk4
from .operators import (
    DEFAULT_EPS,
    OperatorFamily,
    ResidualReport,
    as_operator,
    dagger,
    derivative_family,
    hermitian_sqrt,
    invert,
    quasi_hermiticity_defect,
)
from .spectral import BiorthonormalSystem, build_metric

__all__ = [
    "BasisTrajectory",
    "DysonFactorization",
    "evolve_basis",
    "metric_from_basis",
    "dyson_from_basis",
    "coriolis_from_dyson",
    "propagate_hamiltonian",
    "stationary_reference",
    "textbook_reference",
    "hermitian_root_reference",
    "initial_dyson_alignment",
    "run_strategy_three",
]

INITIAL_TOL = 1e-10
MAX_DRIFT = 1e-6
REFERENCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BasisTrajectory:
    """Evolved kets and double-kets; ``kets[k][:, n]`` is ``|psi_n(t_k)>``."""

    grid: np.ndarray
    kets: np.ndarray
    double_kets: np.ndarray
    drift: np.ndarray
    energies: np.ndarray | None = None

    def __len__(self):
        return self.grid.size

    def system(self, k: int) -> BiorthonormalSystem:
        return BiorthonormalSystem(self.energies, self.kets[k], self.double_kets[k])


@dataclass(frozen=True, eq=False)
class DysonFactorization:
    reference_basis: np.ndarray  # (N, N) constant or (M+1, N, N)
    kappa: np.ndarray
    Omega: DysonTrajectory


def evolve_basis(
    G: OperatorFamily, initial: BiorthonormalSystem, steps_per_sample: int = 1
) -> BasisTrajectory:
    """Propagate ``i d|psi>/dt = G|psi>`` and ``i d|psi>>/dt = G^+|psi>>`` for all pairs.

    The ``2N`` vectors share one RK4 step; no renormalization is applied and
    the biorthonormality defect is recorded per sample as ``drift``.
    """
    if initial.dim != G.dim:
        raise DimensionMismatch(f"basis of dimension {initial.dim} vs generator {G.dim}")
    defect = max(initial.biorthonormality_defect(), initial.bicompleteness_defect())
    if defect > INITIAL_TOL:
        raise InitialBasisInvalid(f"initial basis is not biorthonormal (defect {defect:.3e})")

    N = G.dim
    y0 = np.concatenate([initial.kets, initial.double_kets], axis=1)

    def rhs(t, y):
        g = G.at(t)
        return -1j * np.concatenate([g @ y[:, :N], dagger(g) @ y[:, N:]], axis=1)

    Y = rk4(rhs, y0, G.grid, steps_per_sample)
    K, D = Y[:, :, :N], Y[:, :, N:]
    eye = np.eye(N)
    drift = np.array([np.max(np.abs(dagger(d) @ k - eye)) for k, d in zip(K, D)])
    return BasisTrajectory(G.grid, K, D, drift, initial.energies)


def metric_from_basis(
    traj: BasisTrajectory, kappa=None, max_drift: float = MAX_DRIFT, eps: float = DEFAULT_EPS
) -> list:
    """``Theta(t_k) = sum_n kappa_n |psi_n(t_k)>> <<psi_n(t_k)|`` with constant ``kappa``."""
    worst = float(np.max(traj.drift))
    if worst > max_drift:
        raise ExcessiveDrift(f"biorthonormality drift {worst:.3e} exceeds {max_drift:.1e}")
    return [build_metric(traj.system(k), kappa, eps) for k in range(len(traj))]


def _reference_stack(reference, traj: BasisTrajectory, tol: float) -> np.ndarray:
    M1, N = traj.kets.shape[:2]
    if reference is None:
        R = np.broadcast_to(np.eye(N, dtype=complex), (M1, N, N))
    elif isinstance(reference, OperatorFamily):
        if len(reference) != M1 or not np.allclose(reference.grid, traj.grid, rtol=0, atol=1e-12):
            raise DimensionMismatch("reference family must share the basis grid")
        R = reference.values
    else:
        R = np.asarray(reference, dtype=complex)
        if R.ndim == 2:
            R = np.broadcast_to(as_operator(R, N), (M1, N, N))
    if R.shape != (M1, N, N):
        raise DimensionMismatch(f"reference basis has shape {R.shape}")
    defect = float(np.max(np.linalg.norm(dagger(R) @ R - np.eye(N), axis=(1, 2))))
    if defect > tol:
        raise ReferenceNotOrthonormal(f"reference basis orthonormality defect {defect:.3e}")
    return R


def dyson_from_basis(
    traj: BasisTrajectory, kappa=None, reference_basis=None, ortho_tol: float = REFERENCE_TOL
) -> DysonFactorization:
    """Assemble ``Omega(t_k) = R(t_k) diag(sqrt(kappa)) D(t_k)^+``.

    ``reference_basis`` is ``None`` (standard basis), a constant unitary matrix
    whose columns are the auxiliary vectors, or an :class:`OperatorFamily` of
    such matrices on the basis grid.
    """
    N = traj.kets.shape[1]
    kappa = np.ones(N) if kappa is None else np.asarray(kappa, dtype=float)
    R = _reference_stack(reference_basis, traj, ortho_tol)
    W = (R * np.sqrt(kappa)) @ dagger(traj.double_kets)
    gauge = "reference" if isinstance(reference_basis, OperatorFamily) else "constant_reference"
    Omega = DysonTrajectory.from_values(traj.grid, W, gauge=gauge)
    return DysonFactorization(np.array(R), kappa, Omega)


def coriolis_from_dyson(Omega, order: int = 2) -> OperatorFamily:
    """``Sigma(t_k) = i Omega^{-1}(t_k) dOmega/dt(t_k)`` by finite differences."""
    F = Omega.family if isinstance(Omega, DysonTrajectory) else Omega
    dF = derivative_family(F, order).values
    return OperatorFamily(F.grid, np.array([1j * invert(w) @ dw for w, dw in zip(F.values, dF)]))


def propagate_hamiltonian(traj: BasisTrajectory, E0) -> OperatorFamily:
    """``H(t_k) = sum_n E_n |psi_n(t_k)> <<psi_n(t_k)|`` with energies frozen at ``t_0``."""
    E0 = np.asarray(E0)
    N = traj.kets.shape[1]
    if E0.shape != (N,):
        raise DimensionMismatch(f"expected {N} energies, got shape {E0.shape}")
    return OperatorFamily(traj.grid, (traj.kets * E0) @ dagger(traj.double_kets))


def stationary_reference(grid, energies) -> OperatorFamily:
    """Auxiliary basis ``exp(-i E_n (t - t_0)) |e_n>``: the mapped frame has constant ``diag(E)``."""
    E = np.real(np.asarray(energies))
    t0 = float(np.asarray(grid)[0])
    return OperatorFamily.from_function(
        lambda t: np.diag(np.exp(-1j * E * (t - t0))), grid, tag="stationary_reference"
    )


def textbook_reference(hbar: OperatorFamily, U0=None, steps_per_sample: int = 1) -> OperatorFamily:
    """Auxiliary basis carried by a Hermitian textbook Hamiltonian: ``i dU/dt = hbar(t) U``."""
    U0 = np.eye(hbar.dim, dtype=complex) if U0 is None else as_operator(U0, hbar.dim)
    U = rk4(lambda t, u: -1j * (hbar.at(t) @ u), U0, hbar.grid, steps_per_sample)
    return OperatorFamily(hbar.grid, U, tag="textbook_reference")


def hermitian_root_reference(traj: BasisTrajectory, kappa=None) -> OperatorFamily:
    """Auxiliary basis for which the assembled Dyson map equals ``Theta^{1/2}``."""
    N = traj.kets.shape[1]
    kappa = np.ones(N) if kappa is None else np.asarray(kappa, dtype=float)
    R = []
    for k in range(len(traj)):
        metric = build_metric(traj.system(k), kappa)
        R.append(hermitian_sqrt(metric) @ traj.kets[k] / np.sqrt(kappa))
    return OperatorFamily(traj.grid, np.array(R), tag="hermitian_root_reference")


def initial_dyson_alignment(initial: BiorthonormalSystem, kappa, Omega0) -> np.ndarray:
    """Unitary ``U0`` making the assembled Dyson map equal ``Omega0`` at ``t_0``."""
    N = initial.dim
    kappa = np.ones(N) if kappa is None else np.asarray(kappa, dtype=float)
    W0 = np.sqrt(kappa)[:, None] * dagger(initial.double_kets)
    return as_operator(Omega0, N) @ invert(W0)


def run_strategy_three(
    G: OperatorFamily,
    initial: BiorthonormalSystem,
    kappa=None,
    reference_basis=None,
    steps_per_sample: int = 1,
    derivative_order: int = 2,
    tolerances=None,
) -> ModelBundle:
    """Full state-evolution pipeline ending in ``H = G + Sigma``.

    ``reference_basis`` accepts everything :func:`dyson_from_basis` does plus
    the strings ``"standard"``, ``"stationary"`` (uses ``initial.energies``) and
    ``"hermitian_root"``.
    """
    traj = evolve_basis(G, initial, steps_per_sample)
    Theta = metric_from_basis(traj, kappa)
    kappa = Theta[0].kappa
    if isinstance(reference_basis, str):
        if reference_basis == "standard":
            reference_basis = None
        elif reference_basis == "stationary":
            if initial.energies is None:
                raise ValueError("stationary reference needs initial energies")
            reference_basis = stationary_reference(traj.grid, initial.energies)
        elif reference_basis == "hermitian_root":
            reference_basis = hermitian_root_reference(traj, kappa)
        else:
            raise ValueError(f"unknown reference basis {reference_basis!r}")
    fact = dyson_from_basis(traj, kappa, reference_basis)
    Sigma = coriolis_from_dyson(fact.Omega, derivative_order)
    H = OperatorFamily(G.grid, G.values + Sigma.values)
    metadata = {
        "gauge": fact.Omega.gauge,
        "kappa": kappa,
        "trajectory": traj,
        "factorization": fact,
        "derivative_order": derivative_order,
    }
    if initial.energies is not None:
        metadata["propagated_H"] = propagate_hamiltonian(traj, initial.energies)
    bundle = ModelBundle(
        H=H, G=G, Sigma=Sigma, Theta=Theta, Omega=fact.Omega, strategy_tag="three",
        metadata=metadata,
    )
    tol = merged_tolerances(tolerances, FD_TOLERANCES if derivative_order == 2 else ())
    bundle.metadata["tolerances"] = tol
    bundle.diagnostics = bundle_diagnostics(bundle, tol) + [
        ResidualReport("biorthonormal_drift", float(np.max(traj.drift)), tol["biorthonormal_drift"])
    ]
    if "propagated_H" in metadata:
        compat = max(
            quasi_hermiticity_defect(h, m) for h, m in zip(metadata["propagated_H"].values, Theta)
        )
        bundle.diagnostics.append(ResidualReport("propagated_quasi_hermiticity", compat, 1e-7))
    return bundle
