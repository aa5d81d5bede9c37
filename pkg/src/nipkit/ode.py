"""Classical fourth-order Runge-Kutta on a uniform output grid.

All evolution equations in the package (Dyson maps, basis vectors, states,
Heisenberg-type operator flow) are linear matrix ODEs ``y' = f(t, y)`` and go
through :func:`rk4`.  No renormalization is applied to the solution.
"""
from __future__ import annotations

import numpy as np

from .errors import BlowUp

NORM_CAP = 1e12


def rk4(rhs, y0, grid, steps_per_sample: int = 1, norm_cap: float = NORM_CAP) -> np.ndarray:
    """Integrate ``y' = rhs(t, y)`` and return ``y`` at every grid sample.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> array`` with the shape of ``y``.
    y0 : array
        Value at ``grid[0]``.
    grid : array, shape (M+1,)
        Output times; each interval is split into ``steps_per_sample`` equal steps.
    steps_per_sample : int
    norm_cap : float
        :class:`BlowUp` is raised when ``||y||`` exceeds this value.

    Returns
    -------
    array, shape (M+1,) + y0.shape
    """
    if steps_per_sample < 1:
        raise ValueError("steps_per_sample must be a positive integer")
    grid = np.asarray(grid, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((grid.size,) + y.shape, dtype=complex)
    out[0] = y
    for k in range(grid.size - 1):
        t0 = grid[k]
        h = (grid[k + 1] - t0) / steps_per_sample
        for s in range(steps_per_sample):
            t = t0 + s * h
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm > norm_cap:
            raise BlowUp(f"solution norm {norm:.3e} exceeds cap {norm_cap:.1e} at t={grid[k + 1]:.6g}")
        out[k + 1] = y
    return out
