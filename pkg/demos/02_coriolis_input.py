# Non-stationary 2x2 model built from its Coriolis operator.
#
# Sigma = i diag(0, 1) drives the Dyson map Omega(t) = diag(1, e^t), so the
# metric grows like diag(1, e^{2t}).  A Hermitian ansatz A = Theta H fixes the
# observable Hamiltonian H(t) = [[0, 2], [2 e^{-2t}, 0]], whose energies
# +-2 e^{-t} decay even though A is constant.
import numpy as np

from nipkit import (
    OperatorFamily,
    evolve_observable,
    evolve_state,
    physical_norm,
    run_strategy_two,
    uniform_grid,
)

grid = uniform_grid(0.0, 1.0, 1001)
Sigma = OperatorFamily.constant(np.diag([0, 1j]), grid)
A = OperatorFamily.constant(np.array([[0, 2], [2, 0]], dtype=complex), grid)
bundle = run_strategy_two(Sigma, A)

print("Omega(1) =", np.diag(bundle.Omega[-1]).real, " expected (1, e) =", (1, np.e))
E = np.array([np.sort(np.linalg.eigvals(h).real) for h in bundle.H.values])
for k in (0, 500, 1000):
    t = grid[k]
    print(f"t={t:.1f}  E={E[k]}  closed form +-{2 * np.exp(-t):.6f}")

# states follow G = H - Sigma; their physical norm is conserved even though
# the ordinary norm is not
psi = evolve_state(bundle.G, [1.0, 0.5])
norms = [physical_norm(p, m) for p, m in zip(psi, bundle.Theta)]
print("ordinary norm drift :", np.ptp(np.linalg.norm(psi, axis=1)))
print("physical norm drift :", np.ptp(norms))

# observables follow the Coriolis operator: off-diagonal entries scale by e^{+-t}
Q = evolve_observable([[1.0, 1.0], [1.0, -1.0]], Sigma)
print("Q(1) =\n", Q[-1].real)

for r in bundle.diagnostics:
    print("  ", r)
