"""Cloning machines, with or without a postselected register.

A cloning instance acts on four disjoint registers:

* ``a``: the input copy (state ``phi``),
* ``b``: the blank copy, prepared in ``e``,
* ``c``: the postselected register, prepared in ``f`` and projected onto ``<g|``
  at the end (empty for an ordinary unitary cloner),
* ``m``: machine ancilla, prepared in ``machine`` and ignored at the end.

The figure of merit is the single-copy fidelity ``<phi|rho_X|phi>`` averaged
over the two copies ``X in {a, b}``, evaluated after the postselected branch
has been renormalized. The joint fidelity ``<phi phi|rho_ab|phi phi>`` and the
residual ``sqrt(1 - joint)`` measure how far the output is from an exact
product of two copies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gates import CX
from .postselect import PostselectOutcome, project
from .statevec import (
    DimensionError,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    haar_random_states,
    make_basis_state,
    permute_qubits,
    tensor,
)

ZERO_AMPLITUDE = 1e-12


class BasisCloningError(ValueError):
    """A candidate cloner does not copy some computational basis state."""

    def __init__(self, basis_index: int, label: str, residual: float):
        super().__init__(f"instance does not clone basis state {label} (residual {residual:.3e})")
        self.basis_index = basis_index
        self.label = label
        self.residual = residual


class NoCloningViolation(AssertionError):
    """The superposition witness was cloned too well; should never happen."""


@dataclass(frozen=True)
class RegisterLayout:
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...] = ()
    m: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("a", "b", "c", "m"):
            object.__setattr__(self, name, tuple(int(q) for q in getattr(self, name)))
        if len(self.a) != len(self.b) or not self.a:
            raise DimensionError("copy registers a and b must be non-empty and of equal size")
        allq = self.a + self.b + self.c + self.m
        if sorted(allq) != list(range(len(allq))):
            raise DimensionError(f"registers must partition 0..{len(allq) - 1}, got {allq}")

    @classmethod
    def standard(cls, copy_qubits: int = 1, postselected: int = 0, machine: int = 0) -> RegisterLayout:
        """Contiguous layout ``a | b | m | c``."""
        k = copy_qubits
        a = tuple(range(k))
        b = tuple(range(k, 2 * k))
        m = tuple(range(2 * k, 2 * k + machine))
        c = tuple(range(2 * k + machine, 2 * k + machine + postselected))
        return cls(a, b, c, m)

    @property
    def num_qubits(self) -> int:
        return len(self.a) + len(self.b) + len(self.c) + len(self.m)

    @property
    def copy_qubits(self) -> int:
        return len(self.a)

    @property
    def output_order(self) -> tuple[int, ...]:
        """Register qubits in ``a, b, m, c`` order."""
        return self.a + self.b + self.m + self.c


def _zeros(n: int) -> StateVector:
    return make_basis_state(n, 0)


@dataclass(frozen=True)
class CloningInstance:
    layout: RegisterLayout
    u: UnitaryMatrix
    e: StateVector | None = None
    f: StateVector | None = None
    g: StateVector | None = None
    machine: StateVector | None = None

    def __post_init__(self):
        lay = self.layout
        for name, reg in (("e", lay.b), ("f", lay.c), ("g", lay.c), ("machine", lay.m)):
            s = getattr(self, name)
            if s is None:
                object.__setattr__(self, name, _zeros(len(reg)))
            elif s.num_qubits != len(reg):
                raise DimensionError(f"{name} has {s.num_qubits} qubit(s), register has {len(reg)}")
            elif not s.normalized:
                raise ValueError(f"{name} must be normalized")
        if self.u.num_qubits != lay.num_qubits:
            raise DimensionError(f"u acts on {self.u.num_qubits} qubits, layout has {lay.num_qubits}")

    @property
    def postselected(self) -> bool:
        return bool(self.layout.c)

    def input_state(self, phi: StateVector) -> StateVector:
        """``phi_a e_b f_c machine_m`` laid out on the register."""
        lay = self.layout
        if phi.num_qubits != lay.copy_qubits:
            raise DimensionError(f"phi has {phi.num_qubits} qubit(s), copy register has {lay.copy_qubits}")
        joint = tensor(phi, self.e, self.f, self.machine)
        # joint is in a, b, c, m order; register slot r holds joint qubit order[r]
        order = np.argsort(lay.a + lay.b + lay.c + lay.m)
        return permute_qubits(joint, order)


def cloning_output(inst: CloningInstance, phi: StateVector) -> PostselectOutcome:
    """Prepare, apply ``u`` and project ``c`` onto ``<g|``.

    The returned states are over ``a, b, m`` in that order (``discarded_state``
    covers ``a, b, m, c``). Without a postselected register the projection is
    trivial and ``|c| = 1``.
    """
    lay = inst.layout
    out = apply_unitary(inst.input_state(phi), inst.u, range(lay.num_qubits))
    out = permute_qubits(out, lay.output_order)
    n = lay.num_qubits
    return project(out, range(n - len(lay.c), n), inst.g)


def _copy_fidelities(state: StateVector, phi: StateVector) -> tuple[float, float]:
    k = phi.num_qubits
    fa = project(state, range(k), phi).success_probability
    fb = project(state, range(k, 2 * k), phi).success_probability
    return fa, fb


@dataclass(frozen=True)
class CloningReport:
    phi: StateVector
    output: PostselectOutcome
    c: complex
    residual: float
    fidelity: float
    joint_fidelity: float
    copy_fidelities: tuple[float, float]


def clone_report(inst: CloningInstance, phi: StateVector) -> CloningReport:
    out = cloning_output(inst, phi)
    c = out.success_amplitude
    if abs(c) < ZERO_AMPLITUDE or out.renormalized_state is None:
        return CloningReport(phi, out, c, 1.0, 0.0, 0.0, (0.0, 0.0))
    k = phi.num_qubits
    state = out.renormalized_state
    joint = project(state, range(2 * k), tensor(phi, phi))
    fa, fb = _copy_fidelities(state, phi)
    return CloningReport(
        phi=phi,
        output=out,
        c=c,
        residual=math.sqrt(joint.discarded_weight),
        fidelity=min(1.0, 0.5 * (fa + fb)),
        joint_fidelity=min(1.0, joint.success_probability),
        copy_fidelities=(fa, fb),
    )


def cloning_residual(inst: CloningInstance, phi: StateVector) -> float:
    """Distance of the renormalized output from ``phi (x) phi``: ``sqrt(1 - joint fidelity)``.

    Computed as the norm of the component orthogonal to ``phi phi``, so exact
    clones give zero to machine precision. Annihilated outputs give 1.
    """
    return clone_report(inst, phi).residual


def cloning_fidelity(inst: CloningInstance, phi: StateVector) -> float:
    """Mean single-copy fidelity; 0 when the postselected amplitude is below 1e-12."""
    return clone_report(inst, phi).fidelity


def joint_cloning_fidelity(inst: CloningInstance, phi: StateVector) -> float:
    return clone_report(inst, phi).joint_fidelity


# ---------------------------------------------------------------- batched evaluation

class CloningMap:
    """Linear map ``phi -> <g|_c u (phi e f machine)`` as a matrix.

    The map is linear in ``phi``, so pushing the ``2^k`` basis inputs through
    ``u`` once is enough to evaluate any number of input states.
    """

    def __init__(self, layout: RegisterLayout, e=None, f=None, g=None, machine=None):
        probe = CloningInstance(layout, UnitaryMatrix(np.eye(2**layout.num_qubits)), e, f, g, machine)
        self.layout = layout
        self.e, self.f, self.g, self.machine = probe.e, probe.f, probe.g, probe.machine
        k = layout.copy_qubits
        self.columns = np.stack(
            [probe.input_state(make_basis_state(k, v)).amplitudes for v in range(2**k)], axis=1
        )
        n = layout.num_qubits
        idx = np.arange(2**n).reshape((2,) * n)
        self._row_order = np.transpose(idx, layout.output_order).reshape(-1)
        self._g_conj = self.g.amplitudes.conj()
        self.out_dims = (2**k, 2**k, 2 ** len(layout.m))

    def matrix(self, u: np.ndarray) -> np.ndarray:
        """``(2^(2k+m), 2^k)`` matrix of the postselected map for unitary ``u``."""
        out = (u @ self.columns)[self._row_order]
        out = out.reshape(-1, self._g_conj.size, out.shape[1])
        return np.einsum("rcv,c->rv", out, self._g_conj)

    def evaluate(self, u: np.ndarray, phis: np.ndarray):
        """Per-sample ``(fidelity, joint_fidelity, success_probability)`` arrays."""
        kmat = self.matrix(u)
        return batch_fidelities(kmat, phis, self.out_dims)


def batch_fidelities(kmat: np.ndarray, phis: np.ndarray, dims: tuple[int, int, int]):
    da, db, dm = dims
    out = (phis @ kmat.T).reshape(-1, da, db, dm)
    norm2 = np.einsum("sabm,sabm->s", out.conj(), out).real
    pc = phis.conj()
    amp_a = np.einsum("sa,sabm->sbm", pc, out)
    amp_b = np.einsum("sb,sabm->sam", pc, out)
    amp_ab = np.einsum("sb,sbm->sm", pc, amp_a)
    fa = np.sum(np.abs(amp_a) ** 2, axis=(1, 2))
    fb = np.sum(np.abs(amp_b) ** 2, axis=(1, 2))
    fj = np.sum(np.abs(amp_ab) ** 2, axis=1)
    ok = norm2 >= ZERO_AMPLITUDE**2
    safe = np.where(ok, norm2, 1.0)
    fid = np.where(ok, 0.5 * (fa + fb) / safe, 0.0)
    joint = np.where(ok, fj / safe, 0.0)
    return np.minimum(fid, 1.0), np.minimum(joint, 1.0), norm2


@dataclass(frozen=True)
class CloneStatistics:
    mean_fidelity: float
    std_fidelity: float
    mean_joint_fidelity: float
    mean_success_probability: float
    min_success_probability: float
    num_samples: int


def clone_statistics(
    inst: CloningInstance,
    num_samples: int,
    seed=None,
    sampler: Callable[[int, np.random.Generator], np.ndarray] | None = None,
) -> CloneStatistics:
    """Haar averages of the per-state quantities (or over ``sampler`` output)."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    k = inst.layout.copy_qubits
    if sampler is None:
        phis = haar_random_states(k, num_samples, seed)
    else:
        phis = np.asarray(sampler(num_samples, np.random.default_rng(seed)), dtype=complex)
    cmap = CloningMap(inst.layout, inst.e, inst.f, inst.g, inst.machine)
    fid, joint, p = cmap.evaluate(inst.u.matrix, phis)
    return CloneStatistics(
        mean_fidelity=float(fid.mean()),
        std_fidelity=float(fid.std()),
        mean_joint_fidelity=float(joint.mean()),
        mean_success_probability=float(p.mean()),
        min_success_probability=float(p.min()),
        num_samples=num_samples,
    )


def mean_fidelity(inst: CloningInstance, num_samples: int, seed=None, sampler=None) -> float:
    return clone_statistics(inst, num_samples, seed, sampler).mean_fidelity


# ---------------------------------------------------------------- constructions

def _copy_permutation(k: int) -> np.ndarray:
    """``|x, y> -> |x, x xor y>`` on two ``k``-qubit registers."""
    d = 2**k
    perm = np.zeros((d * d, d * d), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            perm[x * d + (x ^ y), x * d + y] = 1.0
    return perm


def basis_copier(copy_qubits: int = 1) -> CloningInstance:
    """Bitwise CNOT copier; for one qubit this is plain CNOT."""
    layout = RegisterLayout.standard(copy_qubits)
    u = CX if copy_qubits == 1 else _copy_permutation(copy_qubits)
    return CloningInstance(layout, UnitaryMatrix(u))


def cnot_cloner() -> CloningInstance:
    return basis_copier(1)


def amplitude_rotation(c: complex) -> np.ndarray:
    """A 2x2 unitary whose ``<0|W|0>`` entry is ``c``."""
    if not 0 < abs(c) <= 1 + 1e-12:
        raise ValueError(f"need 0 < |c| <= 1, got |c| = {abs(c)}")
    c = complex(c) / max(1.0, abs(c))
    s = math.sqrt(max(0.0, 1.0 - abs(c) ** 2))
    return np.array([[c, -s], [s, c.conjugate()]])


def postselected_basis_cloner(amplitudes: Sequence[complex]) -> CloningInstance:
    """Basis-exact cloner with a one-qubit postselected register.

    Maps ``|v>|0>|0> -> c_v |v>|v>|0> + (orthogonal to <0| on c)``, i.e. it
    copies every basis state ``v`` with success amplitude ``amplitudes[v]``.
    Layout is ``a | b | c``.
    """
    amplitudes = list(amplitudes)
    d = len(amplitudes)
    k = d.bit_length() - 1
    if k < 1 or 2**k != d:
        raise ValueError("need 2^k amplitudes, k >= 1")
    layout = RegisterLayout.standard(k, postselected=1)
    copy = np.kron(_copy_permutation(k), np.eye(2))
    ctrl = np.zeros((2 * d * d, 2 * d * d), dtype=np.complex128)
    for v, c in enumerate(amplitudes):
        proj = np.zeros((d, d))
        proj[v, v] = 1.0
        ctrl += np.kron(proj, np.kron(np.eye(d), amplitude_rotation(c)))
    return CloningInstance(layout, UnitaryMatrix(ctrl @ copy))


def identity_instance(copy_qubits: int = 1) -> CloningInstance:
    layout = RegisterLayout.standard(copy_qubits)
    return CloningInstance(layout, UnitaryMatrix(np.eye(4**copy_qubits)))


def buzek_hillery_oracle() -> CloningInstance:
    """Symmetric universal 1->2 qubit cloner on ``a | b | m``.

    Built from its action on the two inputs ``|v>|0>|0>``::

        |0> -> sqrt(2/3)|00>|0> + sqrt(1/6)(|01> + |10>)|1>
        |1> -> sqrt(2/3)|11>|1> + sqrt(1/6)(|01> + |10>)|0>

    and completed to a unitary on the orthogonal complement.
    """
    a, b = math.sqrt(2 / 3), math.sqrt(1 / 6)
    out0 = np.zeros(8, dtype=np.complex128)
    out1 = np.zeros(8, dtype=np.complex128)
    # index = 4*a + 2*b + m
    out0[0b000] = a
    out0[0b011] = b
    out0[0b101] = b
    out1[0b111] = a
    out1[0b010] = b
    out1[0b100] = b
    iso = np.stack([out0, out1], axis=1)
    _, _, vh = np.linalg.svd(iso.conj().T)
    complement = vh[2:].conj().T
    u = np.zeros((8, 8), dtype=np.complex128)
    u[:, 0b000] = out0
    u[:, 0b100] = out1
    free = [i for i in range(8) if i not in (0b000, 0b100)]
    u[:, free] = complement
    return CloningInstance(RegisterLayout.standard(1, machine=1), UnitaryMatrix(u))


# ---------------------------------------------------------------- contradiction check

def basis_label(index: int, k: int) -> str:
    return f"|{index:0{k}b}>"


@dataclass(frozen=True)
class ContradictionReport:
    basis_residuals: tuple[float, ...]
    basis_amplitudes: tuple[complex, ...]
    witness: StateVector
    witness_report: CloningReport
    threshold: float = field(default=0.2)

    @property
    def witness_fidelity(self) -> float:
        return self.witness_report.fidelity

    @property
    def witness_residual(self) -> float:
        return self.witness_report.residual


def verify_basis_cloner_contradiction(
    inst: CloningInstance, basis_tolerance: float = 1e-9, threshold: float = 0.2
) -> ContradictionReport:
    """Check that a basis-exact cloner fails on the uniform superposition.

    Raises:
        BasisCloningError: some basis state is not cloned within ``basis_tolerance``.
        NoCloningViolation: the superposition residual is below ``threshold``.
    """
    k = inst.layout.copy_qubits
    residuals, amps = [], []
    for v in range(2**k):
        rep = clone_report(inst, make_basis_state(k, v))
        if rep.residual > basis_tolerance:
            raise BasisCloningError(v, basis_label(v, k), rep.residual)
        residuals.append(rep.residual)
        amps.append(rep.c)
    witness = StateVector(np.full(2**k, 2 ** (-k / 2), dtype=complex))
    wrep = clone_report(inst, witness)
    if wrep.residual < threshold:
        raise NoCloningViolation(
            f"superposition cloned with residual {wrep.residual:.3e} < {threshold}"
        )
    return ContradictionReport(tuple(residuals), tuple(amps), witness, wrep, threshold)
