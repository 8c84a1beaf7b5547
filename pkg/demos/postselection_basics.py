"""
Postselection as conjugated state preparation
=============================================

A ``<g|`` on some qubits keeps only the branch where those qubits look like
``|g>``. The kept branch has a complex success amplitude ``c``; everything
else ends up in a discarded component that is orthogonal to ``|g>`` on the
targets. Their weights always add back up to the input norm.
"""
import numpy as np

from twoq import StateVector, haar_random_state, project, tensor

# %%
# Start from an entangled pair a|00> + b|11> and project qubit 1 onto <0|.
a, b = 0.6, 0.8j
out = project(StateVector([a, 0, 0, b]), [1], StateVector.from_label("0"))
print("reduced state     ", np.round(out.reduced_state.amplitudes, 6))
print("success amplitude ", np.round(out.success_amplitude, 6))
print("discarded weight  ", round(out.discarded_weight, 6))
print("renormalized      ", np.round(out.renormalized_state.amplitudes, 6))

# %%
# The bookkeeping identity |c|^2 + <Phi|Phi> = <psi|psi> on random inputs.
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(1000):
    n = int(rng.integers(1, 7))
    k = int(rng.integers(1, n + 1))
    targets = list(rng.choice(n, size=k, replace=False))
    psi = haar_random_state(n, rng)
    res = project(psi, targets, haar_random_state(k, rng))
    worst = max(worst, abs(abs(res.success_amplitude) ** 2 + res.discarded_weight - 1))
print(f"worst normalization defect over 1000 draws: {worst:.2e}")

# %%
# Projecting a prepared |0> ancilla back onto <0| is a no-op with c = 1.
psi = haar_random_state(2, 1)
res = project(tensor(psi, StateVector.from_label("0")), [2], StateVector.from_label("0"))
print("ancilla round trip leaves psi untouched:", res.reduced_state.allclose(psi))
