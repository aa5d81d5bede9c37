"""Dense operator values, metrics, residual functionals and time differentiation.

Operators are plain ``numpy`` complex arrays of shape ``(N, N)``.  Families of
operators sampled on a uniform time grid are stored in :class:`OperatorFamily`;
a family may additionally carry the closed-form rule that generated it, which
the integrators prefer over interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DimensionMismatch,
    GridTooShort,
    IllConditioned,
    NonUniformGrid,
    NotHermitian,
    NotPositiveDefinite,
)

__all__ = [
    "as_operator",
    "fro",
    "dagger",
    "hermiticity_defect",
    "quasi_hermiticity_defect",
    "Metric",
    "assert_metric",
    "hermitian_sqrt",
    "invert",
    "ResidualReport",
    "OperatorFamily",
    "uniform_grid",
    "fd_weights",
    "time_derivative",
    "derivative_family",
]

DEFAULT_EPS = 1e-10
CONDITION_CAP = 1e12


def as_operator(M, dim: Optional[int] = None) -> np.ndarray:
    """Validate ``M`` as a finite square complex matrix and return a copy."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if dim is not None and A.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {A.shape[0]}")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    return A


def fro(M) -> float:
    return float(np.linalg.norm(M))


def dagger(M) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def hermiticity_defect(M) -> float:
    """Relative Frobenius defect ``||M - M^+|| / max(1, ||M||)``."""
    M = np.asarray(M)
    return fro(M - dagger(M)) / max(1.0, fro(M))


def _theta_array(theta) -> np.ndarray:
    return theta.theta if isinstance(theta, Metric) else np.asarray(theta)


def quasi_hermiticity_defect(M, theta) -> float:
    """Relative defect of the quasi-Hermiticity relation ``M^+ Theta = Theta M``."""
    M = np.asarray(M)
    T = _theta_array(theta)
    if M.shape != T.shape:
        raise DimensionMismatch(f"operator {M.shape} vs metric {T.shape}")
    TM = T @ M
    return fro(dagger(M) @ T - TM) / max(1.0, fro(TM))


@dataclass(frozen=True)
class Metric:
    """Hermitian positive-definite inner-product metric.

    ``kappa`` holds the spectral weights when the metric was assembled from a
    biorthonormal system, and is ``None`` when the metric was given directly
    (e.g. as a product of Dyson maps).
    """

    theta: np.ndarray
    pd_margin: float
    kappa: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


def assert_metric(theta, eps: float = DEFAULT_EPS, kappa=None) -> Metric:
    """Certify ``theta`` as a metric.

    Raises
    ------
    NotHermitian
        If the relative Hermiticity defect exceeds ``eps``.
    NotPositiveDefinite
        If the smallest eigenvalue is not above ``eps * ||theta||``.
    """
    T = as_operator(theta)
    defect = hermiticity_defect(T)
    if defect > eps:
        raise NotHermitian(f"metric is not Hermitian (defect {defect:.3e} > {eps:.1e})")
    margin = float(np.linalg.eigvalsh(0.5 * (T + dagger(T)))[0])
    if not margin > eps * fro(T):
        raise NotPositiveDefinite(
            f"metric is not positive definite (smallest eigenvalue {margin:.3e})"
        )
    if kappa is not None:
        kappa = np.asarray(kappa, dtype=float)
    return Metric(theta=T, pd_margin=margin, kappa=kappa)


def hermitian_sqrt(theta) -> np.ndarray:
    """The unique Hermitian positive-definite square root of a metric."""
    if not isinstance(theta, Metric):
        theta = assert_metric(theta)
    T = theta.theta
    w, V = np.linalg.eigh(0.5 * (T + dagger(T)))
    if w[0] <= 0:
        raise NotPositiveDefinite(f"metric has eigenvalue {w[0]:.3e}")
    return (V * np.sqrt(w)) @ dagger(V)


def invert(M, cond_cap: float = CONDITION_CAP) -> np.ndarray:
    """Inverse of ``M`` guarded by a condition-number cap."""
    M = np.asarray(M, dtype=complex)
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditioned(f"condition number {cond:.3e} exceeds cap {cond_cap:.1e}", cond)
    return np.linalg.inv(M)


@dataclass(frozen=True)
class ResidualReport:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
        }

    def __str__(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"


def uniform_grid(start: float, end: float, samples: int) -> np.ndarray:
    if samples < 2 or not end > start:
        raise ValueError(f"invalid grid ({start}, {end}, {samples})")
    return np.linspace(start, end, int(samples))


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Time-parametrized ``N x N`` operator on a uniform grid.

    Parameters
    ----------
    grid : array, shape (M+1,)
        Strictly increasing, uniformly spaced samples.
    values : array, shape (M+1, N, N)
    func : callable, optional
        Closed-form rule ``t -> (N, N) array``.  When present, :meth:`at`
        evaluates it exactly instead of interpolating the samples.
    tag : str, optional
        Identifier of the closed-form rule.
    """

    grid: np.ndarray
    values: np.ndarray
    func: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)
    tag: Optional[str] = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size < 1:
            raise ValueError("grid must be a non-empty 1-d array")
        if values.ndim != 3 or values.shape[0] != grid.size or values.shape[1] != values.shape[2]:
            raise DimensionMismatch(
                f"values of shape {values.shape} do not match grid of {grid.size} samples"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("operator family has non-finite entries")
        if grid.size > 1:
            steps = np.diff(grid)
            if np.any(steps <= 0):
                raise NonUniformGrid("grid must be strictly increasing")
            if not np.allclose(steps, steps.mean(), rtol=1e-8, atol=0.0):
                raise NonUniformGrid("only uniform grids are supported")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, grid, tag=None) -> "OperatorFamily":
        grid = np.asarray(grid, dtype=float)
        values = np.array([np.asarray(func(t), dtype=complex) for t in grid])
        return cls(grid, values, func=func, tag=tag)

    @classmethod
    def constant(cls, M, grid, tag="constant") -> "OperatorFamily":
        M = as_operator(M)
        return cls.from_function(lambda t: M, grid, tag=tag)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def step(self) -> float:
        if self.grid.size < 2:
            raise GridTooShort("a single-sample grid has no step")
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    def __len__(self):
        return self.grid.size

    def __getitem__(self, k) -> np.ndarray:
        return self.values[k]

    @cached_property
    def _spline(self):
        if self.grid.size >= 4:
            return CubicSpline(self.grid, self.values, axis=0)
        return None

    def at(self, t: float) -> np.ndarray:
        """Operator at time ``t``: closed form if known, else cubic-spline interpolation."""
        if self.func is not None:
            return np.asarray(self.func(t), dtype=complex)
        if self._spline is not None:
            return self._spline(t)
        if self.grid.size == 1:
            return self.values[0]
        k = int(np.clip(np.searchsorted(self.grid, t) - 1, 0, self.grid.size - 2))
        w = (t - self.grid[k]) / (self.grid[k + 1] - self.grid[k])
        return (1 - w) * self.values[k] + w * self.values[k + 1]

    def dagger(self) -> "OperatorFamily":
        func = None if self.func is None else (lambda t, f=self.func: dagger(f(t)))
        return OperatorFamily(self.grid, dagger(self.values), func=func, tag=self.tag)

    def __add__(self, other: "OperatorFamily") -> "OperatorFamily":
        return _combine(self, other, np.add)

    def __sub__(self, other: "OperatorFamily") -> "OperatorFamily":
        return _combine(self, other, np.subtract)


def _combine(a: OperatorFamily, b: OperatorFamily, op) -> OperatorFamily:
    if a.values.shape != b.values.shape or not np.allclose(a.grid, b.grid, rtol=0, atol=1e-12):
        raise DimensionMismatch("families differ in grid or dimension")
    func = None
    if a.func is not None and b.func is not None:
        func = lambda t: op(a.func(t), b.func(t))  # noqa: E731
    return OperatorFamily(a.grid, op(a.values, b.values), func=func)


def fd_weights(offsets, derivative: int = 1) -> np.ndarray:
    """Finite-difference weights on integer ``offsets`` (unit spacing)."""
    s = np.asarray(offsets, dtype=float)
    n = s.size
    V = np.vander(s, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[derivative] = float(np.prod(np.arange(1, derivative + 1)))
    w = np.linalg.solve(V, rhs)
    # the exact weights are small-denominator rationals; snap away the roundoff
    return np.array([float(Fraction(x).limit_denominator(10**6)) for x in w])


def _stencil(k: int, last: int, order: int):
    width = order + 1
    lo = min(max(k - order // 2, 0), last + 1 - width)
    offsets = np.arange(lo, lo + width) - k
    return lo, fd_weights(offsets)


def time_derivative(F: OperatorFamily, k: int, order: int = 2) -> np.ndarray:
    """d/dt of a sampled family at sample ``k``.

    ``order=2`` uses the central three-point difference in the interior and the
    one-sided second-order formulas at the ends.  ``order=4`` is the
    five-point (Richardson-extrapolated) counterpart.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    n = len(F)
    if n < order + 1:
        raise GridTooShort(f"order-{order} differences need at least {order + 1} samples")
    if not 0 <= k < n:
        raise IndexError(f"sample index {k} out of range")
    lo, w = _stencil(k, n - 1, order)
    # weights sum to zero: differencing against F_k keeps constant families exact
    diffs = F.values[lo : lo + order + 1] - F.values[k]
    return np.tensordot(w, diffs, axes=1) / F.step


def derivative_family(F: OperatorFamily, order: int = 2) -> OperatorFamily:
    """Sample-wise :func:`time_derivative` over the whole grid."""
    n = len(F)
    if n < order + 1:
        raise GridTooShort(f"order-{order} differences need at least {order + 1} samples")
    out = np.empty_like(F.values)
    h = F.step
    half = order // 2
    # interior: one vectorized central stencil
    _, wc = _stencil(half, n - 1, order)
    centre = F.values[half : n - half]
    inner = sum(w * (F.values[j : n - order + j] - centre) for j, w in enumerate(wc) if w)
    out[half : n - half] = inner / h
    for k in list(range(half)) + list(range(n - half, n)):
        out[k] = time_derivative(F, k, order)
    return OperatorFamily(F.grid, out)
