import math

import numpy as np
import pytest

from qpolar.channel import bit_prob_one, modulate_bpsk, snr_db_to_sigma, transmit
from qpolar.polar import PolarCode, encode


# Dense reference operators, built straight from the textbook gate
# definitions; they share no code with the simulator kernels.

def _single(n, q, m2):
    op = np.array([[1.0 + 0j]])
    for j in reversed(range(n)):
        op = np.kron(op, m2 if j == q else np.eye(2))
    return op


def dense_gate(gate, n):
    dim = 1 << n
    if gate.kind == "X":
        return _single(n, gate.qubits[0], np.array([[0, 1], [1, 0]], dtype=complex))
    if gate.kind == "Z":
        return _single(n, gate.qubits[0], np.array([[1, 0], [0, -1]], dtype=complex))
    if gate.kind == "P":
        return _single(n, gate.qubits[0], np.array([[1, 0], [0, np.exp(1j * gate.angle)]]))
    if gate.kind == "RY":
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        return _single(n, gate.qubits[0], np.array([[c, -s], [s, c]], dtype=complex))
    u = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        if gate.kind == "CNOT":
            c, t = gate.qubits
            j = i ^ (1 << t) if (i >> c) & 1 else i
            u[j, i] = 1
        else:  # MCP
            on = all((i >> q) & 1 for q in gate.qubits)
            u[i, i] = np.exp(1j * gate.angle) if on else 1
    return u


def dense_unitary(gates, n):
    u = np.eye(1 << n, dtype=complex)
    for g in gates:
        u = dense_gate(g, n) @ u
    return u


def random_state(n, rng):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def random_problem(code, snr_db, rng):
    """(message, received y, sigma, p) for one transmission."""
    sigma = snr_db_to_sigma(snr_db)
    m = rng.integers(0, 2, code.k, dtype=np.uint8)
    _, x = encode(code, m)
    y = transmit(modulate_bpsk(x), sigma, rng)
    return m, y, sigma, bit_prob_one(y, sigma)


@pytest.fixture(scope="session")
def code84():
    return PolarCode.build(8, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
