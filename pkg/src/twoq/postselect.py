"""Projection of a qubit subset onto a target bra ``<g|``.

This is the one non-unitary primitive the simulator adds on top of ordinary
state preparation, gates and measurement. The map ``psi -> <g|_T psi`` is
linear; renormalizing the surviving branch is the only nonlinear step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .statevec import (
    ATOL,
    DimensionError,
    StateVector,
    check_targets,
)

DEFAULT_MIN_AMPLITUDE = 1e-8


class PostselectionAnnihilated(RuntimeError):
    """The postselected branch has (numerically) zero amplitude."""

    def __init__(self, message: str, amplitude: float, instruction_index: int | None = None):
        super().__init__(message)
        self.amplitude = amplitude
        self.instruction_index = instruction_index


@dataclass(frozen=True)
class PostselectOutcome:
    """Result of projecting ``targets`` onto ``g``.

    Attributes:
        reduced_state: ``<g|_targets psi`` over the remaining qubits, in their
            original relative order. Subnormalized.
        success_amplitude: complex ``c`` with ``reduced_state = c * renormalized_state``.
            The phase is fixed by making the first nonzero amplitude of
            ``renormalized_state`` real and positive.
        discarded_weight: squared norm of ``discarded_state``.
        discarded_state: the part of the input whose target component is
            orthogonal to ``g``; lives on the full register.
        renormalized_state: ``reduced_state / c``, or ``None`` when ``c == 0``.
    """

    reduced_state: StateVector
    success_amplitude: complex
    discarded_weight: float
    discarded_state: StateVector
    renormalized_state: StateVector | None
    targets: tuple[int, ...]

    @property
    def success_probability(self) -> float:
        return abs(self.success_amplitude) ** 2


def embed(reduced: StateVector, g: StateVector, targets: Sequence[int]) -> StateVector:
    """Inverse of the contraction layout: place ``g`` on ``targets`` next to ``reduced``."""
    n = reduced.num_qubits + g.num_qubits
    targets = check_targets(targets, n)
    rest = [q for q in range(n) if q not in targets]
    # kron puts reduced first, then g; move each axis to its register slot
    joint = np.multiply.outer(reduced.as_tensor(), g.as_tensor())
    joint = np.moveaxis(joint, list(range(n)), rest + list(targets)) if n else joint
    return StateVector(joint.reshape(-1), normalized=False)


def _phase_split(vec: np.ndarray) -> tuple[complex, np.ndarray | None]:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return 0.0j, None
    mags = np.abs(vec)
    lead = int(np.argmax(mags > 1e-12 * norm))
    phase = vec[lead] / mags[lead]
    c = norm * phase
    direction = vec / c
    # exact zero imaginary part on the pivot keeps the convention bit-stable
    direction[lead] = direction[lead].real
    return complex(c), direction


def project(state: StateVector, targets: Sequence[int], g: StateVector) -> PostselectOutcome:
    """Contract ``<g|`` into the ``targets`` of ``state``.

    ``targets[i]`` is matched to qubit ``i`` of ``g``. An empty target set
    with the empty ``g`` leaves the state untouched.
    """
    targets = check_targets(targets, state.num_qubits)
    if len(targets) != g.num_qubits:
        raise DimensionError(f"{len(targets)} target qubit(s) but <g| has {g.num_qubits}")
    if not g.normalized or abs(g.norm_squared() - 1.0) > ATOL:
        raise ValueError("projection target <g| must be a normalized state")

    n = state.num_qubits
    k = len(targets)
    psi = state.as_tensor()
    rest = [q for q in range(n) if q not in targets]
    ordered = np.transpose(psi, rest + list(targets)).reshape(2 ** len(rest), 2**k)
    reduced_amps = ordered @ g.amplitudes.conj()

    c, direction = _phase_split(reduced_amps)
    reduced = StateVector(reduced_amps, normalized=False)
    back = embed(reduced, g, targets)
    phi_amps = state.amplitudes - back.amplitudes
    discarded = StateVector(phi_amps, normalized=False)
    return PostselectOutcome(
        reduced_state=reduced,
        success_amplitude=c,
        discarded_weight=float(np.vdot(phi_amps, phi_amps).real),
        discarded_state=discarded,
        renormalized_state=None if direction is None else StateVector(direction),
        targets=targets,
    )


def postselect_or_fail(
    state: StateVector,
    targets: Sequence[int],
    g: StateVector,
    min_amplitude: float = DEFAULT_MIN_AMPLITUDE,
) -> StateVector:
    """Project and renormalize, raising when the surviving branch is below ``min_amplitude``."""
    out = project(state, targets, g)
    amp = abs(out.success_amplitude)
    if amp < min_amplitude or out.renormalized_state is None:
        raise PostselectionAnnihilated(
            f"postselection on qubits {list(out.targets)} has amplitude {amp:.3e} < {min_amplitude:.0e}",
            amplitude=amp,
        )
    return out.renormalized_state
