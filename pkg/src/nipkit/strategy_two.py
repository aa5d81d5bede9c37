"""Reconstruction from a given Coriolis family ``Sigma(t)``.

The Dyson map solves ``i dOmega/dt = Omega Sigma`` from a chosen initial value,
the metric is ``Omega^+ Omega``, and a Hermitian ansatz ``A(t)`` fixes the
Hamiltonian through ``Theta H = A``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bundle import DysonTrajectory, ModelBundle, bundle_diagnostics, merged_tolerances, metric_stack
from .errors import DimensionMismatch, IllConditioned, NotHermitianAnsatz
from .ode import rk4
from .operators import (
    CONDITION_CAP,
    DEFAULT_EPS,
    OperatorFamily,
    as_operator,
    assert_metric,
    dagger,
    hermitian_sqrt,
    hermiticity_defect,
    invert,
)

log = logging.getLogger(__name__)

__all__ = [
    "HermitianAnsatz",
    "integrate_dyson",
    "integrate_dyson_adjoint",
    "metric_from_dyson",
    "hamiltonians_from_ansatz",
    "run_strategy_two",
]

ANSATZ_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HermitianAnsatz:
    """Hermitian family ``A(t) = Theta(t) H(t)`` carrying the dynamical input.

    With ``symmetrize=True`` the family is replaced by ``(A + A^+)/2`` instead of
    being rejected when it is not Hermitian.
    """

    A: OperatorFamily
    symmetrize: bool = False

    def validated(self, tol: float = ANSATZ_TOL) -> OperatorFamily:
        worst = max(hermiticity_defect(a) for a in self.A.values)
        if worst <= tol:
            return self.A
        if not self.symmetrize:
            raise NotHermitianAnsatz(f"ansatz Hermiticity defect {worst:.3e} exceeds {tol:.1e}")
        log.info("symmetrizing ansatz with Hermiticity defect %.3e", worst)
        func = None
        if self.A.func is not None:
            func = lambda t, f=self.A.func: 0.5 * (f(t) + dagger(f(t)))  # noqa: E731
        return OperatorFamily(
            self.A.grid, 0.5 * (self.A.values + dagger(self.A.values)), func=func, tag=self.A.tag
        )


def _check_start(M, dim):
    M = np.eye(dim, dtype=complex) if M is None else as_operator(M, dim)
    invert(M)
    return M


def _finish(grid, values, gauge, cond_cap):
    traj = DysonTrajectory.from_values(grid, values, gauge=gauge)
    if traj.max_condition > cond_cap:
        raise IllConditioned(
            f"Dyson map condition number reached {traj.max_condition:.3e}", traj.max_condition
        )
    return traj


def integrate_dyson(
    Sigma: OperatorFamily, Omega0=None, steps_per_sample: int = 1, cond_cap: float = CONDITION_CAP
) -> DysonTrajectory:
    """Integrate ``i dOmega/dt = Omega Sigma(t)`` with RK4; ``Omega0`` defaults to the identity."""
    W0 = _check_start(Omega0, Sigma.dim)
    values = rk4(lambda t, W: -1j * (W @ Sigma.at(t)), W0, Sigma.grid, steps_per_sample)
    return _finish(Sigma.grid, values, "integrated", cond_cap)


def integrate_dyson_adjoint(
    Sigma: OperatorFamily,
    Omega0_dagger=None,
    steps_per_sample: int = 1,
    cond_cap: float = CONDITION_CAP,
) -> DysonTrajectory:
    """Integrate the conjugate problem ``i dOmega^+/dt = -Sigma^+(t) Omega^+``.

    The returned trajectory holds the values of ``Omega^+``.
    """
    W0 = _check_start(Omega0_dagger, Sigma.dim)
    values = rk4(lambda t, W: 1j * (dagger(Sigma.at(t)) @ W), W0, Sigma.grid, steps_per_sample)
    return _finish(Sigma.grid, values, "integrated-adjoint", cond_cap)


def metric_from_dyson(Omega: DysonTrajectory, eps: float = DEFAULT_EPS) -> list:
    """``Theta(t_k) = Omega^+(t_k) Omega(t_k)``, certified sample by sample."""
    return [assert_metric(dagger(w) @ w, eps) for w in Omega.values]


def hamiltonians_from_ansatz(
    Theta, Sigma: OperatorFamily, ansatz: HermitianAnsatz, Omega: DysonTrajectory = None,
    tolerances=None,
) -> ModelBundle:
    """``H = Theta^{-1} A`` and ``G = H - Sigma`` on the common grid.

    ``Omega`` is attached to the bundle when given; otherwise the Hermitian
    root of ``Theta`` is used as the Dyson map.
    """
    A = ansatz.validated()
    T = metric_stack(Theta)
    if T.shape != A.values.shape or T.shape != Sigma.values.shape:
        raise DimensionMismatch("metric, Coriolis and ansatz families must share grid and dimension")
    H = OperatorFamily(Sigma.grid, np.array([invert(t) @ a for t, a in zip(T, A.values)]))
    G = OperatorFamily(Sigma.grid, H.values - Sigma.values)
    if Omega is None:
        Omega = DysonTrajectory.from_values(
            Sigma.grid, [hermitian_sqrt(m) for m in Theta], gauge="hermitian_root"
        )
    bundle = ModelBundle(
        H=H, G=G, Sigma=Sigma, Theta=list(Theta), Omega=Omega, strategy_tag="two",
        metadata={"gauge": Omega.gauge, "tolerances": merged_tolerances(tolerances)},
    )
    bundle.diagnostics = bundle_diagnostics(bundle, bundle.metadata["tolerances"])
    return bundle


def run_strategy_two(
    Sigma: OperatorFamily,
    ansatz,
    Omega0=None,
    steps_per_sample: int = 1,
    tolerances=None,
) -> ModelBundle:
    """Full kinematical-input pipeline: Dyson map, metric, Hamiltonian, generator."""
    if not isinstance(ansatz, HermitianAnsatz):
        ansatz = HermitianAnsatz(ansatz)
    Omega = integrate_dyson(Sigma, Omega0, steps_per_sample)
    Theta = metric_from_dyson(Omega)
    bundle = hamiltonians_from_ansatz(Theta, Sigma, ansatz, Omega, tolerances)
    bundle.metadata["steps_per_sample"] = steps_per_sample
    return bundle
