"""Reconstruction and checking of time-dependent quasi-Hermitian quantum models.

A model is the quadruple ``(H, G, Sigma, Theta)(t)``: observable Hamiltonian,
Schroedinger generator, Coriolis operator and metric, tied together by
``H = G + Sigma``, ``H^+ Theta = Theta H`` and ``i dTheta/dt = Theta Sigma - Sigma^+ Theta``.
Three pipelines rebuild the quadruple from different inputs:

* :func:`run_strategy_one` from ``H(t)``,
* :func:`run_strategy_two` from ``Sigma(t)`` and a Hermitian ``A(t) = Theta H``,
* :func:`run_strategy_three` from ``G(t)`` and a biorthonormal basis at ``t_0``.
"""
from . import errors
from .bundle import DEFAULT_TOLERANCES, DysonTrajectory, ModelBundle, bundle_diagnostics, flow_residuals
from .evolution import (
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
from .ode import rk4
from .operators import (
    Metric,
    OperatorFamily,
    ResidualReport,
    assert_metric,
    dagger,
    hermitian_sqrt,
    hermiticity_defect,
    invert,
    quasi_hermiticity_defect,
    time_derivative,
    uniform_grid,
)
from .spectral import (
    BiorthonormalSystem,
    SpectrumCertificate,
    build_metric,
    certify_spectrum,
    dyadic_projector,
    extract_kappa,
    solve_biorthogonal,
)
from .strategy_one import run_strategy_one
from .strategy_three import evolve_basis, run_strategy_three
from .strategy_two import HermitianAnsatz, integrate_dyson, integrate_dyson_adjoint, run_strategy_two

__version__ = "0.1.0"

__all__ = [
    "errors",
    "DEFAULT_TOLERANCES",
    "DysonTrajectory",
    "ModelBundle",
    "bundle_diagnostics",
    "flow_residuals",
    "Observable",
    "StatePair",
    "evolve_costate",
    "evolve_observable",
    "evolve_state",
    "expectation",
    "hermitian_frame_check",
    "pairing_drift",
    "physical_norm",
    "physical_unitarity",
    "rk4",
    "Metric",
    "OperatorFamily",
    "ResidualReport",
    "assert_metric",
    "dagger",
    "hermitian_sqrt",
    "hermiticity_defect",
    "invert",
    "quasi_hermiticity_defect",
    "time_derivative",
    "uniform_grid",
    "BiorthonormalSystem",
    "SpectrumCertificate",
    "build_metric",
    "certify_spectrum",
    "dyadic_projector",
    "extract_kappa",
    "solve_biorthogonal",
    "run_strategy_one",
    "evolve_basis",
    "run_strategy_three",
    "HermitianAnsatz",
    "integrate_dyson",
    "integrate_dyson_adjoint",
    "run_strategy_two",
]
