"""Closed-form models used as oracles.

A ground-truth model starts from a Hermitian textbook Hamiltonian ``hbar(t)``
and a smooth invertible Dyson map ``Omega(t)`` with known derivative, then
derives every other operator exactly:

    H = Omega^{-1} hbar Omega,   Sigma = i Omega^{-1} dOmega/dt,
    G = H - Sigma,               Theta = Omega^+ Omega.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm_frechet

from ..bundle import DysonTrajectory, ModelBundle, bundle_diagnostics
from ..errors import ConditionCapExceeded, NipError
from ..operators import (
    OperatorFamily,
    assert_metric,
    dagger,
    fro,
    hermiticity_defect,
    quasi_hermiticity_defect,
)

__all__ = ["GroundTruthBundle", "generate_ground_truth", "fix_b_ground_truth", "random_hermitian"]

IDENTITY_TOL = 1e-10
MAX_REDRAWS = 10


@dataclass(eq=False)
class GroundTruthBundle:
    """Exact model built from ``hbar(t)`` and ``Omega(t)``.

    ``hbar``, ``H``, ``G``, ``Sigma``, ``A`` (``= Theta H``) and ``dTheta`` are
    :class:`OperatorFamily` objects carrying their closed forms.
    """

    grid: np.ndarray
    hbar: OperatorFamily
    Omega: DysonTrajectory
    H: OperatorFamily
    G: OperatorFamily
    Sigma: OperatorFamily
    A: OperatorFamily
    Theta: list
    dTheta: OperatorFamily
    omega_func: object = field(repr=False, default=None)
    seed: int | None = None

    @classmethod
    def from_maps(cls, grid, hbar, omega_and_derivative, seed=None) -> "GroundTruthBundle":
        """Derive the bundle from ``hbar(t)`` and ``t -> (Omega(t), dOmega/dt(t))``."""
        pair = lru_cache(maxsize=64)(lambda t: omega_and_derivative(float(t)))

        def H(t):
            W, _ = pair(t)
            return np.linalg.solve(W, hbar(t) @ W)

        def Sigma(t):
            W, dW = pair(t)
            return 1j * np.linalg.solve(W, dW)

        def A(t):
            W, _ = pair(t)
            return dagger(W) @ hbar(t) @ W

        def dTheta(t):
            W, dW = pair(t)
            return dagger(dW) @ W + dagger(W) @ dW

        grid = np.asarray(grid, dtype=float)
        Hf = OperatorFamily.from_function(H, grid, tag="ground_truth")
        Sf = OperatorFamily.from_function(Sigma, grid, tag="ground_truth")
        Gf = OperatorFamily.from_function(lambda t: H(t) - Sigma(t), grid, tag="ground_truth")
        Omega = DysonTrajectory.from_values(grid, [pair(t)[0] for t in grid], gauge="ground_truth")
        Theta = [assert_metric(dagger(W) @ W) for W in Omega.values]
        bundle = cls(
            grid=grid,
            hbar=OperatorFamily.from_function(hbar, grid, tag="ground_truth"),
            Omega=Omega,
            H=Hf,
            G=Gf,
            Sigma=Sf,
            A=OperatorFamily.from_function(A, grid, tag="ground_truth"),
            Theta=Theta,
            dTheta=OperatorFamily.from_function(dTheta, grid, tag="ground_truth"),
            omega_func=lambda t: pair(t)[0],
            seed=seed,
        )
        bundle.check_identities()
        return bundle

    @property
    def theta_values(self) -> np.ndarray:
        return np.array([m.theta for m in self.Theta])

    def check_identities(self, tol: float = IDENTITY_TOL) -> dict:
        """Internal identities; raises :class:`NipError` if any exceeds ``tol``."""
        res = {
            "hbar_hermitian": max(hermiticity_defect(h) for h in self.hbar.values),
            "decomposition": max(
                fro(h - g - s) / max(1.0, fro(h))
                for h, g, s in zip(self.H.values, self.G.values, self.Sigma.values)
            ),
            "similarity": max(
                fro(W @ h - hb @ W) / max(1.0, fro(hb))
                for W, h, hb in zip(self.Omega.values, self.H.values, self.hbar.values)
            ),
            "quasi_hermiticity": max(
                quasi_hermiticity_defect(h, m) for h, m in zip(self.H.values, self.Theta)
            ),
        }
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise NipError(f"ground-truth identities violated: {bad}")
        return res

    def as_model_bundle(self, tolerances=None) -> ModelBundle:
        b = ModelBundle(
            H=self.H, G=self.G, Sigma=self.Sigma, Theta=list(self.Theta), Omega=self.Omega,
            strategy_tag="ground_truth", metadata={"gauge": "ground_truth", "seed": self.seed},
        )
        b.diagnostics = bundle_diagnostics(b, tolerances)
        return b


def random_hermitian(rng, N: int, scale: float = 1.0) -> np.ndarray:
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * (X + dagger(X)) / (2.0 * np.sqrt(N))


def _poly(coeffs, t):
    out = np.zeros_like(coeffs[0])
    for c in reversed(coeffs):
        out = out * t + c
    return out


def _dpoly(coeffs, t):
    out = np.zeros_like(coeffs[0])
    for p in range(len(coeffs) - 1, 0, -1):
        out = out * t + p * coeffs[p]
    return out


def generate_ground_truth(
    seed: int,
    N: int,
    grid,
    smoothness_degree: int = 2,
    cond_cap: float = 1e3,
    hermitian_scale: float = 0.3,
    unitary_scale: float = 1.0,
) -> GroundTruthBundle:
    """Random exact model, deterministic per ``seed``.

    ``hbar(t)`` is a Hermitian matrix polynomial of degree ``smoothness_degree``.
    ``Omega(t) = expm(K(t))`` with ``K(t)`` a polynomial of the same degree whose
    coefficients are anti-Hermitian (scale ``unitary_scale``) plus Hermitian
    (scale ``hermitian_scale``); its derivative is the exact Frechet derivative
    of the matrix exponential.  Draws whose Dyson map exceeds ``cond_cap`` on
    the grid are redrawn up to ten times.
    """
    if not 1 <= N <= 16:
        raise ValueError("ground truth supports 1 <= N <= 16")
    grid = np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)
    deg = int(smoothness_degree)
    for _ in range(MAX_REDRAWS):
        h_coef = [random_hermitian(rng, N, 1.0 / (p + 1)) for p in range(deg + 1)]
        k_coef = [
            (1j * random_hermitian(rng, N, unitary_scale) + random_hermitian(rng, N, hermitian_scale))
            / (p + 1)
            for p in range(deg + 1)
        ]

        def omega_pair(t, k_coef=k_coef):
            W, dW = expm_frechet(_poly(k_coef, t), _dpoly(k_coef, t))
            return W, dW

        cond = max(np.linalg.cond(omega_pair(t)[0]) for t in grid)
        if cond <= cond_cap:
            return GroundTruthBundle.from_maps(
                grid, lambda t, c=h_coef: _poly(c, t), omega_pair, seed=seed
            )
    raise ConditionCapExceeded(f"no draw with condition number below {cond_cap:.1e} (seed {seed})")


def fix_b_ground_truth(grid) -> GroundTruthBundle:
    """Closed forms of the non-stationary 2x2 fixture.

    ``Omega = diag(1, e^t)``, ``Theta = diag(1, e^{2t})``,
    ``hbar = 2 e^{-t} sigma_x``, ``H = [[0, 2], [2 e^{-2t}, 0]]``.
    """
    def hbar(t):
        return np.array([[0, 2 * np.exp(-t)], [2 * np.exp(-t), 0]], dtype=complex)

    def omega_pair(t):
        return np.diag([1.0, np.exp(t)]).astype(complex), np.diag([0.0, np.exp(t)]).astype(complex)

    return GroundTruthBundle.from_maps(grid, hbar, omega_pair)
