"""Statevector simulation with postselection, plus no-cloning and BB84 experiments.

Amplitudes are big-endian: qubit 0 is the most significant bit of a basis index.
"""

__version__ = "0.1.0"

from .statevec import (
    DimensionError,
    NotUnitaryError,
    StateVector,
    UnitaryMatrix,
    apply_unitary,
    haar_random_state,
    haar_random_states,
    inner_product,
    make_basis_state,
    state_fidelity,
    tensor,
)
from .postselect import PostselectOutcome, PostselectionAnnihilated, postselect_or_fail, project
from .circuit import CircuitProgram, Instruction, execute, parse, serialize

__all__ = [
    "CircuitProgram",
    "DimensionError",
    "Instruction",
    "NotUnitaryError",
    "PostselectOutcome",
    "PostselectionAnnihilated",
    "StateVector",
    "UnitaryMatrix",
    "apply_unitary",
    "execute",
    "haar_random_state",
    "haar_random_states",
    "inner_product",
    "make_basis_state",
    "parse",
    "postselect_or_fail",
    "project",
    "serialize",
    "state_fidelity",
    "tensor",
]
