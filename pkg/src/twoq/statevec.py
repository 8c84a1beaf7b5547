"""Dense statevector core.

Amplitudes are stored big-endian: qubit 0 is the most significant bit of the
basis index, so ``|q0 q1 ... q(n-1)>`` lives at index ``int("q0q1...", 2)``.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-10

_LABEL_STATES = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (2**-0.5, 2**-0.5),
    "-": (2**-0.5, -(2**-0.5)),
    "r": (2**-0.5, 1j * 2**-0.5),
    "l": (2**-0.5, -1j * 2**-0.5),
}


class DimensionError(ValueError):
    """Operands have incompatible register sizes."""


class NotUnitaryError(ValueError):
    pass


def _num_qubits_for(length: int) -> int:
    n = int(length).bit_length() - 1
    if length < 1 or 2**n != length:
        raise DimensionError(f"length {length} is not a power of two")
    return n


class StateVector:
    """Pure state over ``num_qubits`` qubits.

    ``normalized=False`` marks a subnormalized vector (e.g. the output of a
    projection); its squared norm must still not exceed one. The zero vector
    is allowed only in that case and represents an annihilated branch.
    """

    __slots__ = ("amplitudes", "num_qubits", "normalized")

    def __init__(self, amplitudes, normalized: bool = True):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        self.num_qubits = _num_qubits_for(amps.size)
        norm2 = float(np.vdot(amps, amps).real)
        if normalized and abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        if not normalized and norm2 > 1.0 + ATOL:
            raise ValueError(f"subnormalized state has norm^2 = {norm2!r} > 1")
        amps.flags.writeable = False
        self.amplitudes = amps
        self.normalized = normalized

    @classmethod
    def from_label(cls, label: str) -> StateVector:
        """Product state from characters in ``0 1 + - r l``; ``""`` is the empty register."""
        state = cls([1.0])
        for ch in label:
            try:
                state = tensor(state, cls(_LABEL_STATES[ch]))
            except KeyError:
                raise ValueError(f"unknown state label {ch!r}") from None
        return state

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def scaled(self, factor: complex) -> StateVector:
        return StateVector(self.amplitudes * factor, normalized=False)

    def renormalized(self) -> StateVector:
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("cannot renormalize the zero vector")
        return StateVector(self.amplitudes / n)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def allclose(self, other: StateVector, atol: float = ATOL) -> bool:
        return self.num_qubits == other.num_qubits and np.allclose(
            self.amplitudes, other.amplitudes, rtol=0.0, atol=atol
        )

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.num_qubits == other.num_qubits and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    __hash__ = None

    def __repr__(self):
        flag = "" if self.normalized else ", normalized=False"
        return f"StateVector({np.array2string(self.amplitudes, precision=6)}{flag})"


class UnitaryMatrix:
    """Dense ``2^k x 2^k`` unitary, checked at construction."""

    __slots__ = ("matrix", "num_qubits")

    def __init__(self, matrix, atol: float = ATOL):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        k = _num_qubits_for(m.shape[0])
        if k < 1:
            raise DimensionError("unitary must act on at least one qubit")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > atol:
            raise NotUnitaryError(f"||U^dag U - I||_max = {err:.3e} exceeds {atol:.0e}")
        m.flags.writeable = False
        self.matrix = m
        self.num_qubits = k

    @property
    def dim_qubits(self) -> int:
        return self.num_qubits

    def dagger(self) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix.conj().T)

    def __matmul__(self, other: UnitaryMatrix) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix @ other.matrix)

    def __repr__(self):
        return f"UnitaryMatrix(num_qubits={self.num_qubits})"


def check_targets(targets: Iterable[int], num_qubits: int) -> tuple[int, ...]:
    """Validate a qubit index set against a register of ``num_qubits``."""
    t = tuple(int(q) for q in targets)
    if len(set(t)) != len(t):
        raise ValueError(f"duplicate qubit in {t}")
    for q in t:
        if not 0 <= q < num_qubits:
            raise DimensionError(f"qubit {q} out of range for {num_qubits}-qubit register")
    return t


def apply_matrix(tensor_: np.ndarray, matrix: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Contract ``matrix`` into the ``targets`` axes of a ``(2,)*n (+ batch)`` tensor.

    Trailing axes beyond the qubit axes are carried along untouched, which
    lets callers push several columns through the same gate at once.
    """
    k = len(targets)
    u = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(u, tensor_, axes=(list(range(k, 2 * k)), list(targets)))
    return np.moveaxis(out, list(range(k)), list(targets))


def make_basis_state(num_qubits: int, basis_index: int) -> StateVector:
    if num_qubits < 0:
        raise ValueError("num_qubits must be non-negative")
    if not 0 <= basis_index < 2**num_qubits:
        raise IndexError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(amps)


def tensor(*states: StateVector) -> StateVector:
    """Kronecker product; the first operand occupies the leading qubits."""
    amps = np.ones(1, dtype=np.complex128)
    normalized = True
    for s in states:
        amps = np.kron(amps, s.amplitudes)
        normalized = normalized and s.normalized
    return StateVector(amps, normalized=normalized)


def apply_unitary(state: StateVector, u: UnitaryMatrix, targets: Sequence[int]) -> StateVector:
    targets = check_targets(targets, state.num_qubits)
    if u.num_qubits != len(targets):
        raise DimensionError(
            f"{u.num_qubits}-qubit unitary applied to {len(targets)} target qubit(s)"
        )
    out = apply_matrix(state.as_tensor(), u.matrix, targets)
    return StateVector(out.reshape(-1), normalized=state.normalized)


def permute_qubits(state: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qubits so that new qubit ``i`` is old qubit ``order[i]``."""
    order = check_targets(order, state.num_qubits)
    if len(order) != state.num_qubits:
        raise DimensionError("order must list every qubit exactly once")
    amps = np.transpose(state.as_tensor(), order).reshape(-1)
    return StateVector(amps, normalized=state.normalized)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.num_qubits != b.num_qubits:
        raise DimensionError(f"inner product of {a.num_qubits}- and {b.num_qubits}-qubit states")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def state_fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``."""
    na, nb = a.norm_squared(), b.norm_squared()
    if na == 0.0 or nb == 0.0:
        raise ValueError("fidelity undefined for a zero-norm state")
    return abs(inner_product(a, b)) ** 2 / (na * nb)


def haar_random_states(num_qubits: int, count: int, seed=None) -> np.ndarray:
    """``count`` Haar-random pure states as rows of a ``(count, 2^n)`` array."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, 2**num_qubits, 2)).view(np.complex128)[..., 0]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_random_state(num_qubits: int, seed=None) -> StateVector:
    return StateVector(haar_random_states(num_qubits, 1, seed)[0])


def haar_random_unitary(num_qubits: int, seed=None) -> UnitaryMatrix:
    """QR of a complex Ginibre matrix with the diagonal phase fix."""
    rng = np.random.default_rng(seed)
    d = 2**num_qubits
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return UnitaryMatrix(q * (diag / np.abs(diag)))


def probabilities(state: StateVector, qubits: Sequence[int] | None = None) -> np.ndarray:
    """Computational-basis outcome distribution over ``qubits`` (all by default).

    Normalized by the state's own norm, so subnormalized inputs are handled.
    """
    p = np.abs(state.as_tensor()) ** 2
    if qubits is not None:
        qubits = check_targets(qubits, state.num_qubits)
        rest = tuple(q for q in range(state.num_qubits) if q not in qubits)
        p = np.transpose(p.sum(axis=rest), np.argsort(np.argsort(qubits)))
        p = p.reshape(-1)
    else:
        p = p.reshape(-1)
    total = p.sum()
    if total == 0.0:
        raise ValueError("zero state has no outcome distribution")
    return p / total
