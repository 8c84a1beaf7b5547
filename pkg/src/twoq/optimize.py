"""Layered-rotation ansatz and a seeded derivative-free cloner search."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Callable

import numpy as np

from .gates import CX
from .noclone import CloningInstance, CloningMap, RegisterLayout, clone_statistics
from .statevec import StateVector, UnitaryMatrix, apply_matrix, haar_random_states


def _euler_rotations(angles: np.ndarray) -> np.ndarray:
    """``rz(a) ry(b) rz(c)`` for every row ``(a, b, c)``; shape ``(..., 2, 2)``."""
    a, b, c = angles[..., 0], angles[..., 1], angles[..., 2]
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = np.exp(-0.5j * (a + c)) * cb
    out[..., 0, 1] = -np.exp(-0.5j * (a - c)) * sb
    out[..., 1, 0] = np.exp(0.5j * (a - c)) * sb
    out[..., 1, 1] = np.exp(0.5j * (a + c)) * cb
    return out


def _cx_ladder(n: int) -> np.ndarray:
    eye = np.eye(2**n, dtype=np.complex128).reshape((2,) * n + (2**n,))
    for q in range(n - 1):
        eye = apply_matrix(eye, CX, (q, q + 1))
    return eye.reshape(2**n, 2**n)


@dataclass(frozen=True)
class ParameterizedUnitary:
    """``R_depth . L . R_(depth-1) . L ... L . R_0``.

    Each ``R`` is a layer of ``rz ry rz`` rotations (three angles per qubit)
    and ``L`` is the CNOT ladder ``cx(0,1) cx(1,2) ...``.
    """

    num_qubits: int
    depth: int = 3

    def __post_init__(self):
        if self.num_qubits < 1 or self.depth < 0:
            raise ValueError("need num_qubits >= 1 and depth >= 0")
        object.__setattr__(self, "_ladder", _cx_ladder(self.num_qubits))

    @property
    def num_params(self) -> int:
        return 3 * self.num_qubits * (self.depth + 1)

    def matrix(self, params) -> np.ndarray:
        """Unchecked dense matrix; the hot path for the optimizer."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got shape {params.shape}")
        rots = _euler_rotations(params.reshape(self.depth + 1, self.num_qubits, 3))
        u = None
        for layer in rots:
            r = reduce(np.kron, layer)
            u = r if u is None else r @ self._ladder @ u
        return u

    def __call__(self, params) -> UnitaryMatrix:
        return UnitaryMatrix(self.matrix(params))


def parameterize_unitary(num_qubits: int, depth: int = 3) -> ParameterizedUnitary:
    return ParameterizedUnitary(num_qubits, depth)


@dataclass
class SearchResult:
    x: np.ndarray
    value: float
    history: list[float]  # raw objective value of every evaluation, in order


def pattern_search(
    objective: Callable[[np.ndarray], float],
    x0,
    budget: int,
    rng: np.random.Generator | None = None,
    step: float = math.pi / 2,
    min_step: float = 1e-9,
    restart_scale: float = math.pi,
) -> SearchResult:
    """Maximize ``objective`` with Hooke-Jeeves coordinate/pattern moves.

    Coordinates are polled in a random order each sweep, the step halves after
    an unproductive sweep, and once it falls below ``min_step`` the search
    restarts from a fresh uniform point in ``[-restart_scale, restart_scale]``
    until ``budget`` evaluations are spent.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(rng)
    history: list[float] = []

    def f(x):
        v = float(objective(x))
        history.append(v)
        return v

    x = np.array(x0, dtype=float)
    fx = f(x)
    best_x, best_f = x.copy(), fx
    h = step
    while len(history) < budget:
        base = x.copy()
        for j in rng.permutation(x.size):
            for s in (h, -h):
                if len(history) >= budget:
                    break
                trial = x.copy()
                trial[j] += s
                ft = f(trial)
                if ft > fx:
                    x, fx = trial, ft
                    break
        if fx > best_f:
            best_x, best_f = x.copy(), fx
        moved = not np.array_equal(x, base)
        if moved and len(history) < budget:
            trial = x + (x - base)
            ft = f(trial)
            if ft > fx:
                x, fx = trial, ft
                if fx > best_f:
                    best_x, best_f = x.copy(), fx
        if not moved:
            h *= 0.5
            if h < min_step and len(history) < budget:
                x = rng.uniform(-restart_scale, restart_scale, x.size)
                fx = f(x)
                h = step
                if fx > best_f:
                    best_x, best_f = x.copy(), fx
    return SearchResult(best_x, best_f, history)


class CloningObjective:
    """Mean cloning fidelity of ``parameterization(params)`` over a fixed sample set."""

    def __init__(self, layout: RegisterLayout, parameterization: ParameterizedUnitary, samples: np.ndarray, **states):
        if parameterization.num_qubits != layout.num_qubits:
            raise ValueError("parameterization and layout disagree on register size")
        self.parameterization = parameterization
        self.cmap = CloningMap(layout, **states)
        self.samples = samples

    def __call__(self, params) -> float:
        fid, _, _ = self.cmap.evaluate(self.parameterization.matrix(params), self.samples)
        return float(fid.mean())


def _run_restart(objective: CloningObjective, budget: int, seed_seq: np.random.SeedSequence) -> SearchResult:
    rng = np.random.default_rng(seed_seq)
    x0 = rng.uniform(-math.pi, math.pi, objective.parameterization.num_params)
    return pattern_search(objective, x0, budget, rng)


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_mean_fidelity: float
    best_objective: float
    trace: list[float]
    instance: CloningInstance
    mean_success_probability: float
    final_samples: int
    restart_values: list[float]


def _split_budget(budget: int, restarts: int) -> list[int]:
    base, extra = divmod(budget, restarts)
    return [base + (1 if i < extra else 0) for i in range(restarts) if base + (1 if i < extra else 0) > 0]


def optimize_cloner(
    layout: RegisterLayout,
    parameterization: ParameterizedUnitary,
    objective_samples: int = 256,
    budget: int = 50_000,
    seed: int = 0,
    restarts: int = 8,
    final_samples: int = 100_000,
    workers: int = 1,
    e: StateVector | None = None,
    f: StateVector | None = None,
    g: StateVector | None = None,
    machine: StateVector | None = None,
) -> OptimizationResult:
    """Multi-restart pattern search for the best mean cloning fidelity.

    ``budget`` counts objective evaluations across all restarts. The search
    maximizes the mean over ``objective_samples`` fixed Haar states; the
    winner is then re-scored on ``final_samples`` fresh states, which is what
    ``best_mean_fidelity`` reports. ``trace`` is the best-so-far objective
    after each evaluation, restarts concatenated in order, so it does not
    depend on ``workers``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    ss = np.random.SeedSequence(seed)
    sample_seq, final_seq, restart_root = ss.spawn(3)
    k = layout.copy_qubits
    samples = haar_random_states(k, objective_samples, np.random.default_rng(sample_seq))
    objective = CloningObjective(layout, parameterization, samples, e=e, f=f, g=g, machine=machine)
    budgets = _split_budget(budget, restarts)
    seeds = restart_root.spawn(len(budgets))

    if workers > 1 and len(budgets) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(budgets))) as pool:
            results = list(pool.map(_run_restart, [objective] * len(budgets), budgets, seeds))
    else:
        results = [_run_restart(objective, b, s) for b, s in zip(budgets, seeds)]

    trace: list[float] = []
    best = -math.inf
    for r in results:
        for v in r.history:
            best = max(best, v)
            trace.append(best)
    winner = max(results, key=lambda r: r.value)  # first maximum on ties

    inst = CloningInstance(layout, parameterization(winner.x), e=e, f=f, g=g, machine=machine)
    stats = clone_statistics(inst, final_samples, np.random.default_rng(final_seq))
    return OptimizationResult(
        best_params=winner.x,
        best_mean_fidelity=stats.mean_fidelity,
        best_objective=winner.value,
        trace=trace,
        instance=inst,
        mean_success_probability=stats.mean_success_probability,
        final_samples=final_samples,
        restart_values=[r.value for r in results],
    )


def default_workers() -> int:
    """Worker cap from ``TWOQ_THREADS`` (defaults to 1)."""
    try:
        return max(1, int(os.environ.get("TWOQ_THREADS", "1")))
    except ValueError:
        return 1


def cloner_layout(mode: str) -> RegisterLayout:
    """Register layout for the two optimizer modes.

    ``1wqc``: copies plus one machine qubit. ``2wqc``: the same plus one
    postselected qubit.
    """
    if mode == "1wqc":
        return RegisterLayout.standard(1, machine=1)
    if mode == "2wqc":
        return RegisterLayout.standard(1, machine=1, postselected=1)
    raise ValueError(f"unknown mode {mode!r}")
