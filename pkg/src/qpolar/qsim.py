"""Dense statevector simulator with BitFlip gate noise.

Basis index ``i`` encodes ``|q_{n-1} ... q_1 q_0>``: qubit ``q`` is bit ``q``
of ``i``. Kernels operate on the last axis, so a stack of states with shape
``(batch, 2**n)`` goes through the same code path as a single state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 24

KINDS = ("X", "Z", "P", "RY", "CNOT", "MCP")


@dataclass(frozen=True)
class Gate:
    """A gate on explicit qubit indices.

    ``qubits`` is ``(q,)`` for single-qubit gates, ``(control, target)`` for
    CNOT and ``(*controls, target)`` for MCP. ``angle`` is in radians and is
    only set for P, RY and MCP.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        arity = {"X": 1, "Z": 1, "P": 1, "RY": 1, "CNOT": 2}.get(self.kind)
        if arity is not None and len(qs) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {qs}")
        if self.kind == "MCP" and len(qs) < 2:
            raise ValueError("MCP needs at least one control and a target")
        if len(set(qs)) != len(qs) or min(qs) < 0:
            raise ValueError(f"qubit indices must be distinct and non-negative: {qs}")
        if self.kind in ("P", "RY", "MCP"):
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")


def X(q: int) -> Gate:
    return Gate("X", (q,))


def Z(q: int) -> Gate:
    return Gate("Z", (q,))


def P(q: int, lam: float) -> Gate:
    return Gate("P", (q,), lam)


def RY(q: int, theta: float) -> Gate:
    return Gate("RY", (q,), theta)


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def MCPhase(controls: Sequence[int], target: int, lam: float) -> Gate:
    """Multi-controlled phase; a single-operand request degrades to ``P``."""
    controls = tuple(controls)
    if not controls:
        return P(target, lam)
    return Gate("MCP", (*controls, target), lam)


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of ``gate`` on its own operands (operand ``j`` is bit ``j``)."""
    if gate.kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if gate.kind == "Z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if gate.kind == "P":
        return np.diag([1, np.exp(1j * gate.angle)])
    if gate.kind == "RY":
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate.kind == "CNOT":
        # operand 0 = control (bit 0), operand 1 = target (bit 1)
        u = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            j = i ^ 2 if i & 1 else i
            u[j, i] = 1
        return u
    dim = 1 << len(gate.qubits)
    diag = np.ones(dim, dtype=complex)
    diag[-1] = np.exp(1j * gate.angle)
    return np.diag(diag)


@dataclass(frozen=True)
class NoiseModel:
    """BitFlip noise: X on each operand qubit with probability ``p_bitflip`` before a gate."""

    p_bitflip: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_bitflip <= 1.0:
            raise ValueError(f"bit-flip probability must be in [0, 1], got {self.p_bitflip}")


NOISELESS = NoiseModel(0.0)


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())


def init_zero(n_qubits: int) -> StateVector:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


# -- index tables -----------------------------------------------------------


@lru_cache(maxsize=None)
def _basis(n: int) -> np.ndarray:
    return np.arange(1 << n)


@lru_cache(maxsize=None)
def _flip(n: int, q: int) -> np.ndarray:
    return _basis(n) ^ (1 << q)


@lru_cache(maxsize=None)
def _cnot(n: int, c: int, t: int) -> np.ndarray:
    idx = _basis(n)
    return idx ^ (((idx >> c) & 1) << t)


@lru_cache(maxsize=None)
def _all_ones(n: int, qubits: tuple[int, ...]) -> np.ndarray:
    mask = sum(1 << q for q in qubits)
    idx = _basis(n)
    return idx[(idx & mask) == mask]


@lru_cache(maxsize=None)
def _ry_sign(n: int, q: int) -> np.ndarray:
    return np.where((_basis(n) >> q) & 1, 1.0, -1.0)


@lru_cache(maxsize=None)
def valid_mask(frozen_mask: tuple[bool, ...]) -> np.ndarray:
    """Boolean mask over basis indices whose frozen-position bits are all zero."""
    n = len(frozen_mask)
    fm = sum(1 << i for i, f in enumerate(frozen_mask) if f)
    return (_basis(n) & fm) == 0


def _apply(amps: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    kind = gate.kind
    if kind == "X":
        return amps[..., _flip(n, gate.qubits[0])]
    if kind == "CNOT":
        return amps[..., _cnot(n, *gate.qubits)]
    if kind == "RY":
        q = gate.qubits[0]
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        return c * amps + (s * _ry_sign(n, q)) * amps[..., _flip(n, q)]
    out = amps.copy()
    idx = _all_ones(n, gate.qubits)
    out[..., idx] *= -1.0 if kind == "Z" else np.exp(1j * gate.angle)
    return out


def _check(gate: Gate, n: int) -> None:
    if max(gate.qubits) >= n:
        raise IndexError(f"{gate} addresses a qubit outside a {n}-qubit register")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    _check(gate, state.n_qubits)
    state.amps = _apply(state.amps, gate, state.n_qubits)
    return state


def _gates_of(circuit) -> Sequence[Gate]:
    return circuit.gates if hasattr(circuit, "gates") else circuit


def run_circuit(state: StateVector, circuit, noise: NoiseModel | None = None,
                rng: np.random.Generator | None = None) -> StateVector:
    """Apply every gate in order, inserting BitFlip noise per operand qubit.

    ``circuit`` is a ``CircuitIR`` or a plain sequence of gates.
    """
    gates = _gates_of(circuit)
    n = state.n_qubits
    for g in gates:
        _check(g, n)
    p = noise.p_bitflip if noise is not None else 0.0
    if p > 0 and rng is None:
        raise ValueError("a noisy run needs an rng")
    amps = state.amps
    for g in gates:
        if p > 0:
            for q in g.qubits:
                if p >= 1.0 or rng.random() < p:
                    amps = amps[..., _flip(n, q)]
        amps = _apply(amps, g, n)
    state.amps = amps
    return state


def noise_slots(gates: Sequence[Gate]) -> int:
    """Number of (gate, operand) positions where a bit flip can be inserted."""
    return sum(len(g.qubits) for g in gates)


def simulate_flip_patterns(n: int, gates: Sequence[Gate], flips: np.ndarray,
                           initial: np.ndarray | None = None) -> np.ndarray:
    """Run the circuit once per row of ``flips`` and return the final amplitudes.

    ``flips`` has shape ``(batch, noise_slots(gates))``; column ``j`` says
    whether to insert an X before the ``j``-th (gate, operand) slot.
    """
    flips = np.asarray(flips, dtype=bool)
    batch = flips.shape[0]
    if initial is None:
        amps = np.zeros((batch, 1 << n), dtype=complex)
        amps[:, 0] = 1.0
    else:
        amps = np.tile(initial, (batch, 1))
    cols = np.ascontiguousarray(flips.T)
    any_col = cols.any(axis=1)
    j = 0
    for g in gates:
        for q in g.qubits:
            if any_col[j]:
                rows = np.flatnonzero(cols[j])
                amps[rows] = amps[rows][:, _flip(n, q)]
            j += 1
        amps = _apply(amps, g, n)
    return amps


def sample_noisy(n: int, gates: Sequence[Gate], noise: NoiseModel, shots: int,
                 rng: np.random.Generator) -> dict[int, int]:
    """Histogram of ``shots`` independent noisy executions, one measurement each.

    Each shot draws one uniform per noise slot and one for its measurement,
    and the draws do not depend on ``noise``: a slot flips when its uniform is
    below ``p_bitflip`` and the outcome is the inverse CDF of the final state.
    The same rng state therefore gives coupled runs across noise levels, and
    ``p_bitflip = 0`` reduces to ordinary sampling. Shots that drew the same
    pattern share one simulation.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    slots = noise_slots(gates)
    flips = rng.random((shots, slots)) < noise.p_bitflip
    u = rng.random(shots)
    packed = np.packbits(flips, axis=1) if slots else np.zeros((shots, 1), np.uint8)
    uniq, first, inverse = np.unique(packed, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    amps = simulate_flip_patterns(n, gates, flips[first])
    cdf = np.cumsum(np.abs(amps) ** 2, axis=1)
    outcomes = np.empty(shots, dtype=np.int64)
    last = (1 << n) - 1
    for k, row in enumerate(cdf):
        sel = inverse == k
        outcomes[sel] = np.minimum(np.searchsorted(row, u[sel] * row[-1], side="right"), last)
    idx, counts = np.unique(outcomes, return_counts=True)
    return {int(i): int(c) for i, c in zip(idx, counts)}


def measure_shots(state: StateVector, shots: int, rng: np.random.Generator) -> dict[int, int]:
    """Sample ``shots`` computational-basis measurements; returns index -> count."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = state.probabilities
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"state is not normalized (norm {total:.9f})")
    counts = rng.multinomial(shots, probs / total)
    nz = np.flatnonzero(counts)
    return {int(i): int(counts[i]) for i in nz}


def subspace_probability(state: StateVector, frozen_mask: Iterable[bool]) -> float:
    """Probability mass on basis states whose frozen qubits all read 0."""
    fm = tuple(bool(f) for f in frozen_mask)
    if len(fm) != state.n_qubits:
        raise ValueError("frozen mask length must equal the qubit count")
    return float(np.sum(state.probabilities[valid_mask(fm)]))
