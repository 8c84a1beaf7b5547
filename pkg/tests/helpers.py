"""Brute-force oracles shared by the tests.

These deliberately avoid the tensordot/transpose machinery of the package:
every operator is built as an explicit ``2^n x 2^n`` matrix by looping over
basis indices.
"""
import numpy as np


def bits_of(index, n):
    return [(index >> (n - 1 - q)) & 1 for q in range(n)]


def index_of(bits):
    out = 0
    for b in bits:
        out = 2 * out + b
    return out


def full_operator(matrix, targets, n):
    """Embed a ``2^k`` gate acting on ``targets`` into an ``n``-qubit operator."""
    k = len(targets)
    dim = 2**n
    op = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        cb = bits_of(col, n)
        sub_in = index_of([cb[t] for t in targets])
        for sub_out in range(2**k):
            amp = matrix[sub_out, sub_in]
            if amp == 0:
                continue
            rb = list(cb)
            for t, b in zip(targets, bits_of(sub_out, k)):
                rb[t] = b
            op[index_of(rb), col] += amp
    return op


def contraction_operator(g, targets, n):
    """Matrix of ``<g|_targets`` from ``n`` qubits onto the remaining ones."""
    k = len(targets)
    rest = [q for q in range(n) if q not in targets]
    op = np.zeros((2 ** len(rest), 2**n), dtype=complex)
    for col in range(2**n):
        cb = bits_of(col, n)
        op[index_of([cb[q] for q in rest]), col] += np.conj(g[index_of([cb[t] for t in targets])])
    return op


def random_complex(rng, size):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def random_unitary_matrix(rng, dim):
    q, r = np.linalg.qr(random_complex(rng, (dim, dim)))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_program(rng, max_qubits=5, max_len=12):
    """A valid random CircuitProgram covering every instruction kind."""
    from twoq.circuit import CircuitProgram, Instruction
    from twoq.gates import GATES

    n = int(rng.integers(1, max_qubits + 1))
    names = [g for g in GATES.values() if g.num_qubits <= n]
    measured = set()
    out = []
    for _ in range(int(rng.integers(0, max_len + 1))):
        free = [q for q in range(n) if q not in measured]
        if not free:
            break
        kind = rng.choice(["gate", "gate", "gate", "prep", "postselect", "unitary", "measure"])
        if kind == "gate":
            spec = names[int(rng.integers(len(names)))]
            if spec.num_qubits > len(free):
                continue
            qs = [int(q) for q in rng.choice(free, size=spec.num_qubits, replace=False)]
            params = [float(x) for x in rng.uniform(-10, 10, spec.num_params)]
            out.append(Instruction.gate(spec.name, qs, params))
        elif kind == "prep":
            out.append(Instruction.prep(int(rng.choice(free)), int(rng.integers(2))))
        elif kind == "postselect":
            k = int(rng.integers(1, len(free) + 1))
            qs = [int(q) for q in rng.choice(free, size=k, replace=False)]
            out.append(Instruction.postselect(qs, [int(b) for b in rng.integers(0, 2, k)]))
        elif kind == "unitary":
            k = int(rng.integers(1, min(2, len(free)) + 1))
            qs = [int(q) for q in rng.choice(free, size=k, replace=False)]
            out.append(Instruction.unitary(random_unitary_matrix(rng, 2**k), qs))
        else:
            k = int(rng.integers(1, len(free) + 1))
            qs = [int(q) for q in rng.choice(free, size=k, replace=False)]
            measured.update(qs)
            out.append(Instruction.measure(qs))
    return CircuitProgram(n, tuple(out))
