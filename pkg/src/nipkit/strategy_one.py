"""Reconstruction from a given observable Hamiltonian family ``H(t)``.

At each sample the metric is assembled from the biorthonormal eigensystem of
``H(t_k)`` with one constant weight vector ``kappa``.  The Dyson map is the
Hermitian root of the metric, the Coriolis operator follows from finite
differences of that root, and ``G = H - Sigma``.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bundle import DysonTrajectory, ModelBundle, bundle_diagnostics, merged_tolerances
from .errors import (
    ComplexSpectrumAt,
    DegenerateSpectrum,
    DegenerateSpectrumAt,
    MetricSingularAt,
    NonDiagonalizable,
    NotHermitian,
    NotPositiveDefinite,
)
from .operators import (
    DEFAULT_EPS,
    OperatorFamily,
    dagger,
    derivative_family,
    hermitian_sqrt,
    invert,
)
from .spectral import BiorthonormalSystem, build_metric, certify_spectrum, solve_biorthogonal

log = logging.getLogger(__name__)

__all__ = ["spectrum_reality_scan", "align_system", "eigensystem_branch", "run_strategy_one"]

# an anchor component smaller than this fraction of the column maximum is re-chosen
ANCHOR_FLOOR = 1e-3


def spectrum_reality_scan(H: OperatorFamily, tol: float = 1e-10) -> list:
    """One :class:`SpectrumCertificate` per sample, stopping at the first complex spectrum."""
    certs = []
    for h in H.values:
        cert = certify_spectrum(np.linalg.eigvals(h), tol)
        certs.append(cert)
        if not cert.all_real:
            break
    return certs


def align_system(system: BiorthonormalSystem, previous: BiorthonormalSystem, anchors):
    """Reorder ``system`` to follow ``previous`` and rescale kets on fixed anchor components.

    Returns the aligned system, the (possibly updated) anchors and the number
    of anchors that had to be re-chosen.
    """
    def unit(K):
        return K / np.linalg.norm(K, axis=0)

    overlap = np.abs(dagger(unit(previous.kets)) @ unit(system.kets))
    rows, cols = linear_sum_assignment(-overlap)
    perm = cols[np.argsort(rows)]
    K = system.kets[:, perm]
    D = system.double_kets[:, perm]
    E = system.energies[perm]

    anchors = np.array(anchors)
    cols_idx = np.arange(K.shape[1])
    peak = np.max(np.abs(K), axis=0)
    weak = np.abs(K[anchors, cols_idx]) < ANCHOR_FLOOR * peak
    switches = int(np.count_nonzero(weak))
    if switches:
        anchors[weak] = np.argmax(np.abs(K[:, weak]), axis=0)
    s = K[anchors, cols_idx]
    return (
        BiorthonormalSystem(E, K / s, D * np.conj(s), system.pairing_residual),
        anchors,
        switches,
    )


def eigensystem_branch(H: OperatorFamily, tol: float = 1e-8) -> tuple[list, int]:
    """Smooth branch of biorthonormal systems along the grid.

    The first sample uses the canonical normalization of
    :func:`solve_biorthogonal`; later samples are matched to their
    predecessor by ket overlap and scaled on the same anchor components.
    """
    systems = []
    anchors = None
    switches = 0
    for k, (t, h) in enumerate(zip(H.grid, H.values)):
        try:
            system = solve_biorthogonal(h, tol)
        except (DegenerateSpectrum, NonDiagonalizable) as exc:
            raise DegenerateSpectrumAt(str(exc), k, t) from exc
        if anchors is None:
            anchors = np.argmax(np.abs(system.kets), axis=0)
        else:
            system, anchors, n = align_system(system, systems[-1], anchors)
            if n:
                log.warning("re-anchored %d eigenvector(s) at t=%.6g; metric may jump", n, t)
            switches += n
        systems.append(system)
    return systems, switches


def run_strategy_one(
    H: OperatorFamily,
    kappa=None,
    tol: float = 1e-8,
    derivative_order: int = 2,
    eps: float = DEFAULT_EPS,
    tolerances=None,
) -> ModelBundle:
    """Build ``(H, G, Sigma, Theta)`` from the observable Hamiltonian family.

    Parameters
    ----------
    H : OperatorFamily
        Input Hamiltonian; every sample must have a simple real spectrum.
    kappa : array, optional
        Constant positive metric weights (default all ones).
    tol : float
        Spectral tolerance for degeneracy and reality checks.
    derivative_order : {2, 4}
        Finite-difference order for ``dOmega/dt``; 4 is the Richardson-extrapolated stencil.
    eps : float
        Metric acceptance threshold.
    tolerances : dict, optional
        Overrides for the diagnostic tolerances.
    """
    certs = spectrum_reality_scan(H, tol)
    if not certs[-1].all_real:
        k = len(certs) - 1
        raise ComplexSpectrumAt(
            f"complex spectrum (max |Im E| = {certs[-1].max_imag:.3e})", k, H.grid[k]
        )
    systems, switches = eigensystem_branch(H, tol)

    thetas, omegas = [], []
    for k, system in enumerate(systems):
        try:
            metric = build_metric(system, kappa, eps)
        except (NotHermitian, NotPositiveDefinite) as exc:
            raise MetricSingularAt(str(exc), k, H.grid[k]) from exc
        thetas.append(metric)
        omegas.append(hermitian_sqrt(metric))

    Omega = DysonTrajectory.from_values(H.grid, omegas, gauge="hermitian_root")
    dOmega = derivative_family(Omega.family, derivative_order).values
    Sigma = OperatorFamily(
        H.grid, np.array([1j * invert(w) @ dw for w, dw in zip(Omega.values, dOmega)])
    )
    G = OperatorFamily(H.grid, H.values - Sigma.values)
    bundle = ModelBundle(
        H=H,
        G=G,
        Sigma=Sigma,
        Theta=thetas,
        Omega=Omega,
        strategy_tag="one",
        metadata={
            "gauge": "hermitian_root",
            "kappa": thetas[0].kappa,
            "systems": systems,
            "certificates": certs,
            "anchor_switches": switches,
            "derivative_order": derivative_order,
        },
    )
    fd_keys = ("physical_unitarity", "frame_equivalence") if derivative_order == 2 else ()
    bundle.metadata["tolerances"] = merged_tolerances(tolerances, fd_keys)
    bundle.diagnostics = bundle_diagnostics(bundle, bundle.metadata["tolerances"])
    return bundle
