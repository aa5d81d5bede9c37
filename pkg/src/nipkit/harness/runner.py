"""Dispatch a scenario to its strategy and collect every check."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bundle import ModelBundle, merged_tolerances, sample_residuals
from ..evolution import Observable, evolve_costate, evolve_state, hermitian_frame_check, physical_norm
from ..operators import ResidualReport, fro
from ..strategy_one import run_strategy_one
from ..strategy_three import run_strategy_three
from ..strategy_two import HermitianAnsatz, run_strategy_two
from .scenario import Scenario

__all__ = ["ScenarioResult", "TRUTH_TOLERANCES", "run_scenario", "default_state"]

TRUTH_TOLERANCES = {"truth_theta": 1e-7, "truth_sigma": 1e-6, "truth_H": 1e-6}


@dataclass(eq=False)
class ScenarioResult:
    """Bundle plus every check of one run.

    ``series`` maps a residual name to ``(values, tolerance)`` over the grid;
    the tolerance is ``None`` for plain data such as eigenvalues and norms.
    """

    scenario: Scenario
    bundle: ModelBundle
    checks: list = field(default_factory=list)
    series: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ResidualReport:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def default_state(dim: int) -> np.ndarray:
    return np.ones(dim, dtype=complex) / np.sqrt(dim)


def _build(s: Scenario, steps: int, tol: dict) -> ModelBundle:
    p = s.payload
    if s.input_kind == "one":
        return run_strategy_one(p["H"], s.kappa, derivative_order=s.derivative_order, tolerances=tol)
    if s.input_kind == "two":
        ansatz = HermitianAnsatz(p["A"], bool(p.get("symmetrize", False)))
        return run_strategy_two(p["Sigma"], ansatz, p.get("Omega0"), steps, tolerances=tol)
    return run_strategy_three(
        p["G"], p["initial"], s.kappa, p.get("reference"), steps, s.derivative_order, tolerances=tol
    )


def _relative_series(got, want, floor=1.0):
    """``|got - want| / max(floor, |want|)`` per sample; ``floor = 0`` is the plain relative error."""
    return np.array([fro(g - w) / max(floor, fro(w)) for g, w in zip(got, want)])


def run_scenario(s: Scenario, steps: int | None = None, tol: float | None = None) -> ScenarioResult:
    """Run the strategy selected by ``s.input_kind`` and the full invariant suite.

    ``steps`` overrides the RK4 substeps per grid interval; ``tol`` replaces
    every tolerance by one value.  Numerical exceptions propagate.
    """
    steps = s.steps if steps is None else int(steps)
    overrides = dict(s.tolerances)
    if tol is not None:
        overrides = {k: float(tol) for k in {**merged_tolerances(), **TRUTH_TOLERANCES}}
    bundle = _build(s, steps, overrides or None)
    tols = {**TRUTH_TOLERANCES, **bundle.metadata["tolerances"]}
    tols.update({k: v for k, v in overrides.items() if k in TRUTH_TOLERANCES})

    result = ScenarioResult(s, bundle, list(bundle.diagnostics))
    for name, values in sample_residuals(bundle).items():
        result.series[name] = (values, tols[name])

    # state evolution under G: physical norm and ket/double-ket pairing
    psi0 = default_state(s.dim) if s.state is None else s.state
    psi = evolve_state(bundle.G, psi0, steps)
    phi = evolve_costate(bundle.G, bundle.Theta[0].theta @ psi0, steps)
    norms = np.array([physical_norm(p, t) for p, t in zip(psi, bundle.Theta)])
    unit = np.abs(norms - norms[0]) / norms[0]
    overlap = np.einsum("ki,ki->k", np.conj(phi), psi)
    pairing = np.abs(overlap - overlap[0]) / max(1.0, abs(overlap[0]))
    for name, series in (("physical_unitarity", unit), ("pairing_drift", pairing)):
        result.checks.append(ResidualReport(name, float(np.max(series)), tols[name]))
    result.series["physical_unitarity"] = (unit, tols["physical_unitarity"])
    result.series["pairing_drift"] = (pairing, tols["pairing_drift"])
    result.series["physical_norm"] = (norms, None)

    for label, op in s.observables:
        Lambda = bundle.H if isinstance(op, str) and op == "H" else op
        result.checks.append(
            hermitian_frame_check(bundle, Observable(Lambda, label), psi0, steps, tols["frame_equivalence"])
        )

    E = np.array([np.sort(np.linalg.eigvals(h).real) for h in bundle.H.values])
    for n in range(E.shape[1]):
        result.series[f"eigenvalue[{n}]"] = (E[:, n], None)

    if s.truth is not None:
        truth = s.truth
        pairs = {
            "theta": ("truth_theta", bundle.theta_values, truth.theta_values, 0.0),
            "sigma": ("truth_sigma", bundle.Sigma.values, truth.Sigma.values, 1.0),
            "H": ("truth_H", bundle.H.values, truth.H.values, 1.0),
        }
        for key in s.compare:
            name, got, want, floor = pairs[key]
            series = _relative_series(got, want, floor)
            result.checks.append(ResidualReport(name, float(np.max(series)), tols[name]))
            result.series[name] = (series, tols[name])
    return result
