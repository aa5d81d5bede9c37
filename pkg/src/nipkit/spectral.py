"""Biorthonormal eigensystems of non-Hermitian operators.

For a diagonalizable ``H`` with simple spectrum the right eigenvectors of
``H`` (kets) and of ``H^+`` (double-kets) are paired by eigenvalue and scaled
so that ``<<psi_m|psi_n> = delta_mn``.  Every metric making ``H``
quasi-Hermitian is then a positive combination of the dyads
``|psi_n>> <<psi_n|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    IncompatibleMetric,
    NonDiagonalizable,
    NonPositiveKappa,
)
from .operators import DEFAULT_EPS, Metric, as_operator, assert_metric, dagger, fro

__all__ = [
    "BiorthonormalSystem",
    "SpectrumCertificate",
    "solve_biorthogonal",
    "certify_spectrum",
    "dyadic_projector",
    "build_metric",
    "extract_kappa",
    "normalize_kets",
]


@dataclass(frozen=True, eq=False)
class BiorthonormalSystem:
    """Paired eigenvectors; column ``n`` of ``kets``/``double_kets`` belongs to ``energies[n]``.

    ``energies`` may be ``None`` for a bare biorthonormal basis (e.g. an evolved
    basis with no Hamiltonian attached).
    """

    energies: np.ndarray | None
    kets: np.ndarray
    double_kets: np.ndarray
    pairing_residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.kets.shape[0]

    def overlaps(self) -> np.ndarray:
        """Matrix of ``<<psi_m|psi_n>``."""
        return dagger(self.double_kets) @ self.kets

    def biorthonormality_defect(self) -> float:
        return float(np.max(np.abs(self.overlaps() - np.eye(self.dim))))

    def bicompleteness_defect(self) -> float:
        return fro(self.kets @ dagger(self.double_kets) - np.eye(self.dim))

    def reconstruct(self, energies=None) -> np.ndarray:
        """``sum_n E_n |psi_n><<psi_n|``."""
        E = self.energies if energies is None else np.asarray(energies)
        return (self.kets * E) @ dagger(self.double_kets)

    @classmethod
    def from_kets(cls, kets, energies=None) -> "BiorthonormalSystem":
        """Complete a ket basis with its biorthonormal partner ``(K^{-1})^+``."""
        K = as_operator(kets)
        D = dagger(np.linalg.inv(K))
        E = None if energies is None else np.asarray(energies, dtype=complex)
        return cls(E, K, D)


@dataclass(frozen=True)
class SpectrumCertificate:
    all_real: bool
    max_imag: float
    min_gap: float
    bounded_below_at: float


def _min_gap(E) -> float:
    E = np.asarray(E)
    if E.size < 2:
        return float("inf")
    d = np.abs(E[:, None] - E[None, :])
    d[np.diag_indices(E.size)] = np.inf
    return float(d.min())


def normalize_kets(K: np.ndarray, anchors=None) -> tuple[np.ndarray, np.ndarray]:
    """Scale each column so its anchor component equals 1.

    The anchor defaults to the largest-modulus component of the column.
    Returns the scaled kets and the anchor indices.
    """
    if anchors is None:
        anchors = np.argmax(np.abs(K), axis=0)
    anchors = np.asarray(anchors)
    pivots = K[anchors, np.arange(K.shape[1])]
    return K / pivots, anchors


def solve_biorthogonal(H, tol: float = 1e-8) -> BiorthonormalSystem:
    """Solve ``H|psi> = E|psi>`` and ``H^+|psi>> = E|psi>>`` and biorthonormalize.

    Eigenpairs of ``H`` and ``H^+`` are matched by minimal ``|E_i - conj(mu_j)|``
    with ties broken by the overlap of the candidate vectors.  Each ket is
    scaled so that its largest-modulus component is exactly 1; the
    double-ket absorbs the remaining scale so ``<<psi_n|psi_n> = 1``.
    Eigenvalues keep the LAPACK order of ``eig(H)``.

    Raises
    ------
    DegenerateSpectrum
        If two eigenvalues are closer than ``tol``.
    NonDiagonalizable
        If a ket and its partner double-ket are numerically orthogonal.
    """
    H = as_operator(H)
    E, K = np.linalg.eig(H)
    gap = _min_gap(E)
    if gap <= tol:
        raise DegenerateSpectrum(f"eigenvalue separation {gap:.3e} <= {tol:.1e}")
    mu, D = np.linalg.eig(dagger(H))

    Kn = K / np.linalg.norm(K, axis=0)
    Dn = D / np.linalg.norm(D, axis=0)
    alignment = np.abs(dagger(Dn) @ Kn)  # [j, i]
    cost = np.abs(E[:, None] - np.conj(mu)[None, :]) + tol * (1.0 - alignment.T)
    rows, cols = linear_sum_assignment(cost)
    order = cols[np.argsort(rows)]
    D = D[:, order]
    pairing = float(np.max(np.abs(E - np.conj(mu[order])))) if E.size else 0.0

    K, _ = normalize_kets(K)
    c = np.einsum("ij,ij->j", np.conj(D), K)
    scale = np.linalg.norm(D, axis=0) * np.linalg.norm(K, axis=0)
    if np.any(np.abs(c) < tol * scale):
        raise NonDiagonalizable("ket and double-ket are orthogonal; H is defective within tolerance")
    D = D / np.conj(c)
    return BiorthonormalSystem(E, K, D, pairing)


def certify_spectrum(system, tol: float = 1e-10) -> SpectrumCertificate:
    """Numerical reality/gap/boundedness certificate of a spectrum.

    ``system`` may be a :class:`BiorthonormalSystem` or an array of eigenvalues.
    """
    E = np.asarray(system.energies if isinstance(system, BiorthonormalSystem) else system)
    E = np.atleast_1d(E).astype(complex)
    max_imag = float(np.max(np.abs(E.imag)))
    scale = max(1.0, float(np.max(np.abs(E))))
    return SpectrumCertificate(
        all_real=max_imag <= tol * scale,
        max_imag=max_imag,
        min_gap=_min_gap(E),
        bounded_below_at=float(np.min(E.real)),
    )


def dyadic_projector(system: BiorthonormalSystem, n: int) -> np.ndarray:
    """``|psi_n><<psi_n| / <<psi_n|psi_n>``."""
    if not 0 <= n < system.dim:
        raise IndexError(f"eigenpair index {n} out of range for dimension {system.dim}")
    k = system.kets[:, n]
    d = system.double_kets[:, n]
    return np.outer(k, np.conj(d)) / np.vdot(d, k)


def build_metric(system: BiorthonormalSystem, kappa=None, eps: float = DEFAULT_EPS) -> Metric:
    """``Theta = sum_n kappa_n |psi_n>> <<psi_n|``; ``kappa`` defaults to all ones."""
    N = system.dim
    kappa = np.ones(N) if kappa is None else np.asarray(kappa, dtype=float)
    if kappa.shape != (N,):
        raise DimensionMismatch(f"kappa must have {N} entries")
    if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
        raise NonPositiveKappa("kappa weights must be real and strictly positive")
    D = system.double_kets
    T = (D * kappa) @ dagger(D)
    return assert_metric(0.5 * (T + dagger(T)), eps, kappa=kappa)


def extract_kappa(system: BiorthonormalSystem, theta, tol: float = 1e-8) -> np.ndarray:
    """Spectral weights ``kappa_n = <psi_n|Theta|psi_n>`` of a compatible metric.

    Raises :class:`IncompatibleMetric` when ``Theta`` is not diagonal in the
    ket basis, i.e. when it does not make the source operator quasi-Hermitian.
    """
    T = theta.theta if isinstance(theta, Metric) else as_operator(theta)
    K = system.kets
    G = dagger(K) @ T @ K
    diag = np.real(np.diag(G))
    off = G - np.diag(np.diag(G))
    bound = tol * float(np.max(np.abs(diag)))
    worst = float(np.max(np.abs(off))) if system.dim > 1 else 0.0
    if worst > bound:
        raise IncompatibleMetric(f"metric couples eigenvectors (off-diagonal {worst:.3e})")
    if np.any(diag <= 0):
        raise IncompatibleMetric("metric gives non-positive weights")
    return diag
