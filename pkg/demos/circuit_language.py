"""
The .2wqc circuit language
==========================

Circuits are small text files: a ``qubits N`` header, then one instruction
per line. ``postselect`` is the two-way addition; everything else is an
ordinary gate-model circuit.
"""
from pathlib import Path

from twoq.circuit import CircuitError, execute, parse, serialize

HERE = Path(__file__).parent

# %%
# Parse and run the cloning attempt: copy the control with a CNOT, then
# postselect an extra qubit that was rotated to |+>.
program = parse((HERE / "circuits" / "clone_attempt.2wqc").read_text())
result = execute(program, shots=2000, seed=7)
print(serialize(program))
print("success probability:", result.success_probability)
for rec in result.postselect_log:
    print(f"  instruction {rec.instruction_index}: |c| = {abs(rec.amplitude):.4f}")
print("histogram:", result.histogram())

# %%
# Serialization is canonical, so parse(serialize(p)) gives back p exactly.
print("round trip ok:", parse(serialize(program)) == program)

# %%
# Errors point at the offending token.
try:
    parse("qubits 2\nh q0\ncx q0 q7\n")
except CircuitError as exc:
    print(exc)
