"""A first look at Gaussian states.

Everything the engine simulation needs about a state of N harmonic modes is
carried by its covariance matrix (and mean, which stays zero here).  This
script builds a few small states by hand and reads off the quantities that
the thermodynamic bookkeeping is made of.

Run with ``python notebooks/01_gaussian_states.py``.
"""

import numpy as np

from gauss_engine.gaussian import (
    GaussianState,
    ModeLayout,
    build_hamiltonian,
    log_partition,
    mean_energy,
    mutual_information,
    reduce,
    relative_entropy_thermal,
    symplectic_eigenvalues,
    thermal_state,
    von_neumann_entropy,
)

np.set_printoptions(precision=6, suppress=True)

# A single oscillator with omega = 1 at temperature 0.8.  Its covariance is
# diagonal with entries nu = coth(omega / 2T) / 2, and nu alone fixes the
# entropy.
H1 = build_hamiltonian(ModeLayout(("x",)), [[1.0]])
s1 = thermal_state(H1, 0.8)
print("thermal covariance:\n", s1.cov)
print("symplectic eigenvalue:", symplectic_eigenvalues(s1.cov))
print("entropy:", von_neumann_entropy(s1))
print("ln Z   :", log_partition(H1, 0.8))
print("<H>    :", mean_energy(s1, H1))

# The vacuum is pure: nu = 1/2 and zero entropy.  Measured against the
# thermal state it carries a finite relative entropy -- an amount of
# free energy that an engine could in principle draw on.
vac = GaussianState(s1.layout, np.zeros(2), 0.5 * np.eye(2))
print("\nvacuum entropy:", von_neumann_entropy(vac))
print("D(vacuum || thermal at T=0.8):", relative_entropy_thermal(vac, H1, 0.8))

# Two-mode squeezing correlates two modes while leaving each one thermal.
# The global state stays pure, so the mutual information is twice the
# entropy of either half.
r = 0.5
c, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
# ordering (x1, x2, p1, p2)
cov = np.array([
    [c, sh, 0, 0],
    [sh, c, 0, 0],
    [0, 0, c, -sh],
    [0, 0, -sh, c],
])
tmsv = GaussianState(ModeLayout(("a", "b")), np.zeros(4), cov)
print("\ntwo-mode squeezed vacuum, r = 0.5")
print("global symplectic spectrum:", symplectic_eigenvalues(tmsv.cov))
print("entropy of one mode       :", von_neumann_entropy(reduce(tmsv, ["a"])))
print("mutual information I(a:b) :", mutual_information(tmsv, ["a"], ["b"]))
