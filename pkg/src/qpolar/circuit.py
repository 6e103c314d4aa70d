"""Circuit IR for the decoder, its stage builders, peephole pass and text format."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polar import PolarCode, xor_network
from .qsim import CNOT, RY, Gate, MCPhase, X, Z

INIT = "init"
REVERSE_TRAVERSAL = "reverse_traversal"
NEGATION = "negation"


def fbs_tag(i: int) -> str:
    return f"fbs_iteration({i})"


def is_fbs_tag(tag: str) -> bool:
    return tag.startswith("fbs_iteration(")


@dataclass(frozen=True)
class CircuitIR:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    tags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        gates = tuple(self.gates)
        tags = tuple(self.tags) if self.tags else ("",) * len(gates)
        if len(tags) != len(gates):
            raise ValueError("need exactly one stage tag per gate")
        for g in gates:
            if max(g.qubits) >= self.n_qubits:
                raise ValueError(f"{g} addresses a qubit outside a {self.n_qubits}-qubit register")
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "tags", tags)

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "CircuitIR") -> "CircuitIR":
        if other.n_qubits != self.n_qubits:
            raise ValueError("cannot join circuits of different widths")
        return CircuitIR(self.n_qubits, self.gates + other.gates, self.tags + other.tags)

    def stages(self) -> list[tuple[str, tuple[Gate, ...]]]:
        """Maximal runs of gates sharing a tag, in order."""
        runs: list[tuple[str, list[Gate]]] = []
        for g, t in zip(self.gates, self.tags):
            if runs and runs[-1][0] == t:
                runs[-1][1].append(g)
            else:
                runs.append((t, [g]))
        return [(t, tuple(gs)) for t, gs in runs]

    def count(self, kind: str | None = None) -> int:
        if kind is None:
            return len(self.gates)
        return sum(g.kind == kind for g in self.gates)


def _tagged(n: int, gates: Sequence[Gate], tag: str) -> CircuitIR:
    return CircuitIR(n, tuple(gates), (tag,) * len(gates))


# -- builders ---------------------------------------------------------------


def build_initialization(thetas) -> CircuitIR:
    """One RY(theta_i) on each qubit i, ascending."""
    thetas = np.asarray(thetas, dtype=float)
    return _tagged(thetas.size, [RY(i, t) for i, t in enumerate(thetas)], INIT)


def _rt_gates(n: int) -> list[Gate]:
    return [CNOT(src, dst) for src, dst in reversed(xor_network(n))]


def build_reverse_traversal(code: PolarCode) -> CircuitIR:
    """CNOT network taking |x> to |u> with u = x G_N (the encoder XORs, reversed in time)."""
    return _tagged(code.n, _rt_gates(code.n), REVERSE_TRAVERSAL)


def build_fbs_block(code: PolarCode, thetas, lambda1: float, lambda2: float,
                    index: int = 0) -> CircuitIR:
    """One amplitude-amplification step ``-A S_0(lambda2) A^-1 S_chi(lambda1)``.

    ``S_chi`` phases the valid subspace, ``S_0`` phases ``|0...0>`` and the
    overall sign comes from Z X Z X on qubit 0.
    """
    n = code.n
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size != n:
        raise ValueError(f"need {n} angles, got {thetas.size}")
    frozen = [int(i) for i in code.frozen_positions]
    if not frozen:
        raise ValueError("rate-1 code has no frozen bits; frozen bit satisfaction is undefined")
    everyone = list(range(n))
    rt = _rt_gates(n)

    gates: list[Gate] = []
    gates += [X(q) for q in frozen]
    gates.append(MCPhase(frozen[:-1], frozen[-1], lambda1))
    gates += [X(q) for q in frozen]
    # A^-1: undo the reverse traversal, then the rotations
    gates += list(reversed(rt))
    gates += [RY(i, -t) for i, t in enumerate(thetas)]
    gates += [X(q) for q in everyone]
    gates.append(MCPhase(everyone[:-1], everyone[-1], lambda2))
    gates += [X(q) for q in everyone]
    gates += [RY(i, t) for i, t in enumerate(thetas)]
    gates += rt
    body = _tagged(n, gates, fbs_tag(index))
    return body + _tagged(n, [Z(0), X(0), Z(0), X(0)], NEGATION)


def build_decoder(code: PolarCode, thetas, phases: Sequence[tuple[float, float]]) -> CircuitIR:
    """Initialization, reverse traversal and one FBS block per ``(lambda1, lambda2)``."""
    circ = build_initialization(thetas) + build_reverse_traversal(code)
    for i, (l1, l2) in enumerate(phases):
        circ = circ + build_fbs_block(code, thetas, l1, l2, index=i)
    return circ


# -- optimization -----------------------------------------------------------


def zero_wire_cnots(rt_cnots: Sequence[Gate], frozen_mask) -> set[tuple[int, int]]:
    """CNOTs of a reverse-traversal network that only ever see zero wires.

    Walks the network from the ``u`` side (encoder order) with the frozen
    wires known to be zero; a CNOT whose control and target are both still
    zero at that point is the identity on every valid-subspace component.
    """
    zero = {i for i, f in enumerate(frozen_mask) if f}
    removable = set()
    for g in reversed(rt_cnots):
        c, t = g.qubits
        if c in zero and t in zero:
            removable.add((c, t))
        elif c not in zero:
            zero.discard(t)
    return removable


def _cancel_pairs(gates: list[Gate], tags: list[str]) -> tuple[list[Gate], list[str]]:
    out: list[Gate | None] = []
    out_tags: list[str] = []
    stacks: dict[int, list[int]] = {}
    for g, t in zip(gates, tags):
        if g.kind in ("X", "CNOT"):
            tops = {stacks[q][-1] if stacks.get(q) else None for q in g.qubits}
            if len(tops) == 1:
                j = tops.pop()
                if j is not None and out[j] == g:
                    out[j] = None
                    for q in g.qubits:
                        stacks[q].pop()
                    continue
        out.append(g)
        out_tags.append(t)
        for q in g.qubits:
            stacks.setdefault(q, []).append(len(out) - 1)
    keep = [i for i, g in enumerate(out) if g is not None]
    return [out[i] for i in keep], [out_tags[i] for i in keep]


def optimize(circuit: CircuitIR, frozen_mask) -> CircuitIR:
    """Remove cancelling X/X and CNOT/CNOT pairs and zero-wire CNOTs.

    Pair cancellation needs no other gate touching either operand in
    between. Zero-wire CNOT removal only touches the reverse-traversal and
    FBS stages and preserves the valid-subspace distribution, not the full
    unitary. Runs to a fixpoint.
    """
    frozen_mask = [bool(f) for f in frozen_mask]
    if len(frozen_mask) != circuit.n_qubits:
        raise ValueError("frozen mask length must equal the qubit count")
    gates = list(circuit.gates)
    tags = list(circuit.tags)

    rt = [g for g, t in zip(gates, tags) if t == REVERSE_TRAVERSAL and g.kind == "CNOT"]
    if rt:
        dead = zero_wire_cnots(rt, frozen_mask)
        keep = [
            i for i, (g, t) in enumerate(zip(gates, tags))
            if not (g.kind == "CNOT" and g.qubits in dead
                    and (t == REVERSE_TRAVERSAL or is_fbs_tag(t)))
        ]
        gates = [gates[i] for i in keep]
        tags = [tags[i] for i in keep]

    while True:
        before = len(gates)
        gates, tags = _cancel_pairs(gates, tags)
        if len(gates) == before:
            break
    return CircuitIR(circuit.n_qubits, tuple(gates), tuple(tags))


# -- text format ------------------------------------------------------------


def _fmt(angle: float) -> str:
    return "%.17g" % angle


def export_text(circuit: CircuitIR) -> str:
    lines = [f"# qubits {circuit.n_qubits}"]
    tag = ""
    for g, t in zip(circuit.gates, circuit.tags):
        if t != tag:
            lines.append(f"# stage {t}".rstrip())
            tag = t
        qs = [f"q{q}" for q in g.qubits]
        if g.kind in ("X", "Z"):
            lines.append(f"{g.kind} {qs[0]}")
        elif g.kind in ("P", "RY"):
            lines.append(f"{g.kind} {qs[0]} {_fmt(g.angle)}")
        elif g.kind == "CNOT":
            lines.append(f"CNOT {qs[0]} {qs[1]}")
        else:
            lines.append(f"MCP {','.join(qs[:-1])} {qs[-1]} {_fmt(g.angle)}")
    return "\n".join(lines) + "\n"


_QUBIT = re.compile(r"q(\d+)$")


def _q(token: str, lineno: int) -> int:
    m = _QUBIT.match(token)
    if not m:
        raise ValueError(f"line {lineno}: bad qubit token {token!r}")
    return int(m.group(1))


def parse_text(text: str) -> CircuitIR:
    """Inverse of :func:`export_text`."""
    n = None
    tag = ""
    gates: list[Gate] = []
    tags: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("qubits"):
                n = int(body.split()[1])
            elif body == "stage" or body.startswith("stage "):
                tag = body[len("stage"):].strip()
            continue
        tok = line.split()
        op = tok[0]
        try:
            if op in ("X", "Z") and len(tok) == 2:
                g = Gate(op, (_q(tok[1], lineno),))
            elif op in ("P", "RY") and len(tok) == 3:
                g = Gate(op, (_q(tok[1], lineno),), float(tok[2]))
            elif op == "CNOT" and len(tok) == 3:
                g = CNOT(_q(tok[1], lineno), _q(tok[2], lineno))
            elif op == "MCP" and len(tok) == 4:
                controls = [_q(c, lineno) for c in tok[1].split(",")]
                g = Gate("MCP", (*controls, _q(tok[2], lineno)), float(tok[3]))
            else:
                raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        except (TypeError, IndexError) as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
        gates.append(g)
        tags.append(tag)
    if n is None:
        raise ValueError("missing '# qubits <n>' header")
    return CircuitIR(n, tuple(gates), tuple(tags))

