"""Named gate registry shared by the circuit DSL and the ansatz builder."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .statevec import UnitaryMatrix

_S2 = 2**-0.5


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _controlled(u: np.ndarray) -> np.ndarray:
    d = u.shape[0]
    m = np.eye(2 * d, dtype=np.complex128)
    m[d:, d:] = u
    return m


I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(np.complex128)
H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128)
S = np.diag([1.0, 1j])
T = np.diag([1.0, np.exp(0.25j * np.pi)])
CX = _controlled(X)
CZ = _controlled(Z)
SWAP = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]
CCX = _controlled(CX)


@dataclass(frozen=True)
class GateSpec:
    name: str
    num_qubits: int
    num_params: int
    build: Callable[..., np.ndarray]

    def matrix(self, *params: float) -> np.ndarray:
        if len(params) != self.num_params:
            raise ValueError(f"gate {self.name!r} takes {self.num_params} parameter(s), got {len(params)}")
        return self.build(*params)

    def unitary(self, *params: float) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix(*params))


def _const(m):
    return lambda: m


GATES: dict[str, GateSpec] = {
    spec.name: spec
    for spec in [
        GateSpec("i", 1, 0, _const(I2)),
        GateSpec("x", 1, 0, _const(X)),
        GateSpec("y", 1, 0, _const(Y)),
        GateSpec("z", 1, 0, _const(Z)),
        GateSpec("h", 1, 0, _const(H)),
        GateSpec("s", 1, 0, _const(S)),
        GateSpec("t", 1, 0, _const(T)),
        GateSpec("rx", 1, 1, rx),
        GateSpec("ry", 1, 1, ry),
        GateSpec("rz", 1, 1, rz),
        GateSpec("cx", 2, 0, _const(CX)),
        GateSpec("cz", 2, 0, _const(CZ)),
        GateSpec("swap", 2, 0, _const(SWAP)),
        GateSpec("ccx", 3, 0, _const(CCX)),
    ]
}


def gate(name: str, *params: float) -> UnitaryMatrix:
    """Look up ``name`` in the registry and build its unitary."""
    try:
        spec = GATES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown gate {name!r}") from None
    return spec.unitary(*params)
