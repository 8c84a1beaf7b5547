"""
How well can a universal cloner do?
===================================

The best symmetric universal cloner gives each copy fidelity 5/6. A direct
search over 3-qubit circuits (input, blank, machine qubit) approaches that
value. Giving the search a postselected ancilla as well does not break
through it.

Set ``TWOQ_THREADS`` to run restarts in parallel. The budgets here are small
so the script finishes in a few seconds; the acceptance test uses 5e4.
"""
import numpy as np

from twoq.noclone import buzek_hillery_oracle, cloning_fidelity, mean_fidelity
from twoq.optimize import cloner_layout, default_workers, optimize_cloner, parameterize_unitary
from twoq.statevec import StateVector, haar_random_states

# %%
bh = buzek_hillery_oracle()
fids = [cloning_fidelity(bh, StateVector(a)) for a in haar_random_states(1, 100, seed=0)]
print(f"reference cloner: min {min(fids):.12f} max {max(fids):.12f} (5/6 = {5 / 6:.12f})")
print(f"Haar average from 20000 samples: {mean_fidelity(bh, 20000, seed=1):.5f}")

# %%
for mode in ("1wqc", "2wqc"):
    lay = cloner_layout(mode)
    res = optimize_cloner(
        lay, parameterize_unitary(lay.num_qubits, 3), budget=8000, restarts=2, seed=0,
        final_samples=20000, workers=default_workers(),
    )
    trace = np.array(res.trace)
    print(f"{mode}: best mean fidelity {res.best_mean_fidelity:.4f}, "
          f"success probability {res.mean_success_probability:.3f}, "
          f"trace at 10/100/1000/end: {trace[[9, 99, 999, -1]].round(4)}")
