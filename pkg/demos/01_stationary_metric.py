# Stationary 2x2 model: metric from the biorthonormal eigensystem.
#
# H = [[0, 4], [1, 0]] is not Hermitian but has the real spectrum +-2.  Its
# kets and double-kets build the metric Theta = sum_n kappa_n |psi_n>> <<psi_n|,
# and the Hermitian root of Theta maps H onto a Hermitian matrix.
import numpy as np

from nipkit import (
    OperatorFamily,
    build_metric,
    dyadic_projector,
    extract_kappa,
    hermitian_sqrt,
    hermiticity_defect,
    quasi_hermiticity_defect,
    run_strategy_one,
    solve_biorthogonal,
    uniform_grid,
)

H = np.array([[0, 4], [1, 0]], dtype=complex)
system = solve_biorthogonal(H)
print("energies:", system.energies.real)
print("kets (columns):\n", system.kets.real)
print("double-kets (columns):\n", system.double_kets.real)
print("projector onto E = +2:\n", dyadic_projector(system, 0).real)

# the weights kappa are free; (2, 2) gives the diagonal metric diag(1, 4)
theta = build_metric(system, [2.0, 2.0])
print("Theta:\n", theta.theta.real)
print("H^+ Theta - Theta H defect:", quasi_hermiticity_defect(H, theta))
print("kappa read back:", extract_kappa(system, theta))

Omega = hermitian_sqrt(theta)
hbar = Omega @ H @ np.linalg.inv(Omega)
print("Omega H Omega^-1:\n", hbar.real, " hermiticity defect", hermiticity_defect(hbar))

# as a constant family the time-dependent pipeline has nothing to do:
# the Coriolis operator vanishes and G = H
grid = uniform_grid(0.0, 1.0, 101)
bundle = run_strategy_one(OperatorFamily.constant(H, grid), kappa=[2.0, 2.0])
print("max |Sigma|:", np.abs(bundle.Sigma.values).max())
for r in bundle.diagnostics:
    print("  ", r)
