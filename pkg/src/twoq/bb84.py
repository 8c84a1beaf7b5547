"""BB84 over a noiseless channel with pluggable eavesdroppers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gates import H
from .noclone import CloningInstance, clone_report, postselected_basis_cloner
from .postselect import DEFAULT_MIN_AMPLITUDE
from .statevec import StateVector, apply_matrix, probabilities

BASES = ("Z", "X")


def encode(bit: int, basis: str) -> StateVector:
    """``Z``: |0>, |1>; ``X``: |+>, |->."""
    return StateVector.from_label(("01" if basis == "Z" else "+-")[bit])


def _to_basis(state: StateVector, qubits: Sequence[int], basis: str) -> StateVector:
    if basis == "Z":
        return state
    t = state.as_tensor()
    for q in qubits:
        t = apply_matrix(t, H, (q,))
    return StateVector(t.reshape(-1), normalized=state.normalized)


def measure(state: StateVector, basis: str, rng: np.random.Generator) -> int:
    p = probabilities(_to_basis(state, range(state.num_qubits), basis))
    return int(rng.choice(2, p=p))


@dataclass(frozen=True)
class Transmission:
    bob_bit: int | None  # None: pulse blocked
    eve_bit: int | None = None
    clone_fidelity: float | None = None


class Eavesdropper:
    name = "none"

    def transmit(self, bit: int, basis: str, bob_basis: str, rng: np.random.Generator) -> Transmission:
        return Transmission(measure(encode(bit, basis), bob_basis, rng))


class InterceptResend(Eavesdropper):
    """Measure in a random basis from ``eve_bases`` and resend the result."""

    name = "intercept-resend"

    def __init__(self, eve_bases: Sequence[str] = BASES):
        self.eve_bases = tuple(eve_bases)

    def transmit(self, bit, basis, bob_basis, rng):
        eve_basis = self.eve_bases[int(rng.integers(len(self.eve_bases)))]
        e = measure(encode(bit, basis), eve_basis, rng)
        return Transmission(measure(encode(e, eve_basis), bob_basis, rng), eve_bit=e)


class PostselectClone(Eavesdropper):
    """Run a (possibly postselected) cloner on every pulse.

    Bob receives copy ``a``; Eve keeps copy ``b`` and measures it in Bob's
    basis once bases are announced. Pulses whose postselected amplitude falls
    below ``min_amplitude`` are blocked.
    """

    name = "postselect-clone"

    def __init__(self, instance: CloningInstance | None = None, min_amplitude: float = DEFAULT_MIN_AMPLITUDE):
        if instance is None:
            instance = postselected_basis_cloner([1.0, 1 / math.sqrt(2)])
        if instance.layout.copy_qubits != 1:
            raise ValueError("BB84 pulses are single qubits")
        self.instance = instance
        self.min_amplitude = min_amplitude
        self._cache: dict[tuple[int, str, str], tuple[np.ndarray | None, float]] = {}

    def _table(self, bit, basis, bob_basis):
        key = (bit, basis, bob_basis)
        if key not in self._cache:
            rep = clone_report(self.instance, encode(bit, basis))
            if abs(rep.c) < self.min_amplitude or rep.output.renormalized_state is None:
                self._cache[key] = (None, rep.fidelity)
            else:
                joint = _to_basis(rep.output.renormalized_state, (0, 1), bob_basis)
                self._cache[key] = (probabilities(joint, (0, 1)), rep.fidelity)
        return self._cache[key]

    def transmit(self, bit, basis, bob_basis, rng):
        p, fid = self._table(bit, basis, bob_basis)
        if p is None:
            return Transmission(None, None, fid)
        outcome = int(rng.choice(4, p=p))
        return Transmission(outcome >> 1, outcome & 1, fid)


def make_eavesdropper(name: str, instance: CloningInstance | None = None) -> Eavesdropper:
    if name == "none":
        return Eavesdropper()
    if name == "intercept-resend":
        return InterceptResend()
    if name == "postselect-clone":
        return PostselectClone(instance)
    raise ValueError(f"unknown eavesdropper strategy {name!r}")


@dataclass(frozen=True)
class Bb84Config:
    num_pulses: int
    sample_fraction: float = 0.5
    seed: int = 0
    eve: Eavesdropper = field(default_factory=Eavesdropper)

    def __post_init__(self):
        if self.num_pulses < 1:
            raise ValueError("num_pulses must be >= 1")
        if not 0 < self.sample_fraction < 1:
            raise ValueError("sample_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class Bb84Result:
    num_pulses: int
    sifted_length: int
    checked_bits: int
    errors: int
    qber: float
    qber_by_basis: dict[str, float]
    checked_by_basis: dict[str, int]
    eve_information: float
    discarded_by_eve: int
    max_clone_fidelity_x: float | None

    def qber_sigma(self, p: float) -> float:
        """Binomial standard error of the QBER estimate at true rate ``p``."""
        return math.sqrt(p * (1 - p) / self.checked_bits) if self.checked_bits else math.inf


def run_bb84(config: Bb84Config) -> Bb84Result:
    """Simulate ``num_pulses`` pulses; every pulse draws from its own child seed.

    Blocked pulses never reach Bob and are only counted. QBER is measured on a
    random ``sample_fraction`` of the sifted key; ``eve_information`` is the
    fraction of all sifted bits Eve guessed correctly.
    """
    root = np.random.SeedSequence(config.seed)
    pulse_root, check_seq = root.spawn(2)
    eve = config.eve
    sifted_alice: list[int] = []
    sifted_bob: list[int] = []
    sifted_basis: list[str] = []
    eve_correct = 0
    blocked = 0
    max_fid_x = None
    for child in pulse_root.spawn(config.num_pulses):
        rng = np.random.default_rng(child)
        bit = int(rng.integers(2))
        basis = BASES[int(rng.integers(2))]
        bob_basis = BASES[int(rng.integers(2))]
        tx = eve.transmit(bit, basis, bob_basis, rng)
        if basis == "X" and tx.clone_fidelity is not None:
            max_fid_x = tx.clone_fidelity if max_fid_x is None else max(max_fid_x, tx.clone_fidelity)
        if tx.bob_bit is None:
            blocked += 1
            continue
        if basis != bob_basis:
            continue
        sifted_alice.append(bit)
        sifted_bob.append(tx.bob_bit)
        sifted_basis.append(basis)
        eve_correct += int(tx.eve_bit == bit)

    n = len(sifted_alice)
    check_rng = np.random.default_rng(check_seq)
    m = int(round(config.sample_fraction * n))
    checked = np.sort(check_rng.choice(n, size=m, replace=False)) if n else np.array([], dtype=int)
    errs = {b: 0 for b in BASES}
    counts = {b: 0 for b in BASES}
    for i in checked:
        counts[sifted_basis[i]] += 1
        errs[sifted_basis[i]] += int(sifted_alice[i] != sifted_bob[i])
    total_err = sum(errs.values())
    return Bb84Result(
        num_pulses=config.num_pulses,
        sifted_length=n,
        checked_bits=m,
        errors=total_err,
        qber=total_err / m if m else 0.0,
        qber_by_basis={b: (errs[b] / counts[b] if counts[b] else 0.0) for b in BASES},
        checked_by_basis=counts,
        eve_information=eve_correct / n if n else 0.0,
        discarded_by_eve=blocked,
        max_clone_fidelity_x=max_fid_x,
    )


# ---------------------------------------------------------------- exact oracle

_INT_STATES = {("Z", 0): (1, 0), ("Z", 1): (0, 1), ("X", 0): (1, 1), ("X", 1): (1, -1)}


def _prob(outcome: tuple[int, int], state: tuple[int, int]) -> Fraction:
    dot = outcome[0] * state[0] + outcome[1] * state[1]
    n1 = outcome[0] ** 2 + outcome[1] ** 2
    n2 = state[0] ** 2 + state[1] ** 2
    return Fraction(dot * dot, n1 * n2)


def enumerate_intercept_resend(eve_bases: Sequence[str] = BASES, sifted_basis: str | None = None) -> Fraction:
    """Exact expected QBER by enumerating every discrete choice.

    States are kept as unnormalized integer vectors so every probability is
    an exact rational. ``eve_bases=()`` means no eavesdropper;
    ``sifted_basis`` restricts the average to key bits sent in that basis.
    """
    err = Fraction(0)
    kept = Fraction(0)
    quarter = Fraction(1, 4)  # uniform (bit, basis) for Alice
    for bit in (0, 1):
        for a_basis in BASES:
            if sifted_basis is not None and a_basis != sifted_basis:
                continue
            # Bob's basis matches with probability 1/2; only those survive sifting
            w = quarter * Fraction(1, 2)
            kept += w
            sent = _INT_STATES[(a_basis, bit)]
            wrong = _INT_STATES[(a_basis, 1 - bit)]
            if not eve_bases:
                err += w * _prob(wrong, sent)
                continue
            for e_basis in eve_bases:
                for e in (0, 1):
                    p_e = _prob(_INT_STATES[(e_basis, e)], sent)
                    resent = _INT_STATES[(e_basis, e)]
                    err += w * Fraction(1, len(eve_bases)) * p_e * _prob(wrong, resent)
    return err / kept
