"""The reconstructed quadruple ``(H, G, Sigma, Theta)(t)`` and its invariant checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    Metric,
    OperatorFamily,
    ResidualReport,
    dagger,
    derivative_family,
    fro,
    hermiticity_defect,
    invert,
    quasi_hermiticity_defect,
)

__all__ = [
    "DysonTrajectory",
    "ModelBundle",
    "DEFAULT_TOLERANCES",
    "metric_stack",
    "flow_residuals",
    "sample_residuals",
    "bundle_diagnostics",
    "FD_TOLERANCES",
    "merged_tolerances",
]

DEFAULT_TOLERANCES = {
    "decomposition": 1e-12,
    "metric_compatibility": 1e-9,
    "gauge_consistency": 1e-9,
    "flow_identity": 1e-5,
    "generator_flow": 1e-5,
    "frame_hermiticity": 1e-8,
    "spectrum_reality": 1e-8,
    "physical_unitarity": 1e-8,
    "biorthonormal_drift": 1e-8,
    "frame_equivalence": 1e-6,
    "pairing_drift": 1e-8,
}

# bundles whose Sigma comes from second-order differences carry O(h^2) errors
FD_TOLERANCES = {
    "metric_compatibility": 1e-5,
    "frame_hermiticity": 1e-5,
    "spectrum_reality": 1e-5,
    "physical_unitarity": 1e-5,
    "frame_equivalence": 1e-5,
}


def merged_tolerances(overrides=None, fd_keys=()) -> dict:
    """Defaults, relaxed on ``fd_keys`` to :data:`FD_TOLERANCES`, then user overrides."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update({k: FD_TOLERANCES[k] for k in fd_keys})
    tol.update(overrides or {})
    return tol


@dataclass(frozen=True, eq=False)
class DysonTrajectory:
    """Time-indexed invertible Dyson map ``Omega(t)`` with ``Theta = Omega^+ Omega``."""

    grid: np.ndarray
    values: np.ndarray
    max_condition: float
    gauge: str = ""

    @classmethod
    def from_values(cls, grid, values, gauge: str = "") -> "DysonTrajectory":
        values = np.asarray(values, dtype=complex)
        cond = float(max(np.linalg.cond(v) for v in values))
        return cls(np.asarray(grid, dtype=float), values, cond, gauge)

    @property
    def family(self) -> OperatorFamily:
        return OperatorFamily(self.grid, self.values, tag=self.gauge or None)

    def __len__(self):
        return self.grid.size

    def __getitem__(self, k):
        return self.values[k]


def metric_stack(metrics) -> np.ndarray:
    return np.array([m.theta if isinstance(m, Metric) else m for m in metrics])


@dataclass(eq=False)
class ModelBundle:
    H: OperatorFamily
    G: OperatorFamily
    Sigma: OperatorFamily
    Theta: list
    Omega: DysonTrajectory
    strategy_tag: str
    diagnostics: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return self.H.grid

    @property
    def theta_values(self) -> np.ndarray:
        return metric_stack(self.Theta)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.diagnostics)

    def report(self, name: str):
        for r in self.diagnostics:
            if r.name == name:
                return r
        raise KeyError(name)


def flow_residuals(theta_values, Sigma, G=None, grid=None, order: int = 2):
    """Sample-wise residuals of the metric flow identities.

    Returns ``(r_sigma, r_g)`` where ``r_sigma[k]`` is the relative residual of
    ``i dTheta/dt = Theta Sigma - Sigma^+ Theta`` and ``r_g[k]`` that of
    ``G^+ Theta - Theta G = i dTheta/dt`` (``None`` when ``G`` is not given).
    ``dTheta/dt`` is taken by finite differences of the given ``order``.
    """
    S = Sigma.values if isinstance(Sigma, OperatorFamily) else np.asarray(Sigma)
    grid = Sigma.grid if grid is None else grid
    T = np.asarray(theta_values)
    iTdot = 1j * derivative_family(OperatorFamily(grid, T), order).values
    scale = np.maximum(1.0, np.linalg.norm(iTdot, axis=(1, 2)))
    r_sigma = np.linalg.norm(iTdot - (T @ S - dagger(S) @ T), axis=(1, 2)) / scale
    r_g = None
    if G is not None:
        Gv = G.values if isinstance(G, OperatorFamily) else np.asarray(G)
        r_g = np.linalg.norm(dagger(Gv) @ T - T @ Gv - iTdot, axis=(1, 2)) / scale
    return r_sigma, r_g


def sample_residuals(bundle: ModelBundle) -> dict:
    """Per-sample residual series of the shared invariants (name -> array over the grid)."""
    H, G, S = bundle.H.values, bundle.G.values, bundle.Sigma.values
    T = bundle.theta_values
    W = bundle.Omega.values
    out = {
        "decomposition": np.array(
            [fro(h - g - s) / max(1.0, fro(h)) for h, g, s in zip(H, G, S)]
        ),
        "metric_compatibility": np.array([quasi_hermiticity_defect(h, t) for h, t in zip(H, T)]),
        "gauge_consistency": np.array([fro(dagger(w) @ w - t) / fro(t) for w, t in zip(W, T)]),
        "frame_hermiticity": np.array(
            [hermiticity_defect(w @ h @ invert(w)) for w, h in zip(W, H)]
        ),
    }
    imag = []
    for h in H:
        E = np.linalg.eigvals(h)
        imag.append(float(np.max(np.abs(E.imag))) / max(1.0, float(np.max(np.abs(E)))))
    out["spectrum_reality"] = np.array(imag)
    if len(bundle.grid) >= 3:
        out["flow_identity"], out["generator_flow"] = flow_residuals(T, bundle.Sigma, bundle.G)
    return out


def bundle_diagnostics(bundle: ModelBundle, tolerances=None) -> list:
    """Invariant suite shared by all strategies: worst sample of each residual series."""
    tol = merged_tolerances(tolerances)
    return [
        ResidualReport(name, float(np.max(series)), tol[name])
        for name, series in sample_residuals(bundle).items()
    ]
