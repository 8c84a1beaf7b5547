"""
Copying basis states is not copying states
==========================================

A CNOT copies |0> and |1> perfectly. Linearity then fixes what it does to
|+>, and the result is an entangled pair rather than two copies. Adding a
postselected register does not help: any cloner that is exact on the basis
still scores at most 1/2 on the superposition.
"""
import numpy as np

from twoq.noclone import (
    clone_report,
    cnot_cloner,
    postselected_basis_cloner,
    verify_basis_cloner_contradiction,
)
from twoq.statevec import StateVector

# %%
cnot = cnot_cloner()
for label in "01+":
    rep = clone_report(cnot, StateVector.from_label(label))
    print(f"|{label}>  fidelity {rep.fidelity:.3f}  joint {rep.joint_fidelity:.3f}  residual {rep.residual:.3f}")

# %%
# Sweep random postselected cloners that first copy in the basis and then
# reweight the branches with success amplitudes (c0, c1).
rng = np.random.default_rng(3)
worst_single = worst_joint = 0.0
for _ in range(500):
    c = (1 - rng.uniform(0, 1, 2)) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
    rep = verify_basis_cloner_contradiction(postselected_basis_cloner(c))
    worst_single = max(worst_single, rep.witness_fidelity)
    worst_joint = max(worst_joint, rep.witness_report.joint_fidelity)
print(f"best |+> fidelity over 500 postselected cloners: single {worst_single:.6f}, joint {worst_joint:.6f}")

# %%
# The joint fidelity has a closed form: |c0 + c1|^2 / (4 (|c0|^2 + |c1|^2)).
c = np.array([0.9, 0.9])
rep = clone_report(postselected_basis_cloner(c), StateVector.from_label("+"))
print("equal amplitudes:", rep.joint_fidelity, "closed form:", abs(c.sum()) ** 2 / (4 * np.sum(abs(c) ** 2)))
