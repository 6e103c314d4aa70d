"""Polar code construction and encoding over GF(2)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

G2 = np.array([[1, 0], [1, 1]], dtype=np.uint8)

MAX_DEPTH = 16


def build_generator(d: int) -> np.ndarray:
    """Return ``G_2`` Kronecker-powered ``d`` times as a uint8 matrix."""
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= MAX_DEPTH:
        raise ValueError(f"tree depth must be in [1, {MAX_DEPTH}], got {d!r}")
    g = G2
    for _ in range(d - 1):
        g = np.kron(g, G2)
    return g.astype(np.uint8)


def bhattacharyya_bec(n: int, z0: float = 0.5) -> np.ndarray:
    """Bhattacharyya parameters of the ``n`` synthetic channels of a BEC(z0).

    Channel ``i`` splits into ``2i`` (worse, ``2z - z^2``) and ``2i + 1``
    (better, ``z^2``), so the least significant index bit is the last
    polarization step.
    """
    z = np.array([z0], dtype=float)
    while z.size < n:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def _check_length(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise ValueError(f"block length must be a power of two >= 2, got {n}")
    return n.bit_length() - 1


def select_frozen(n: int, k: int) -> np.ndarray:
    """Boolean mask of frozen positions (True = frozen) for an (n, k) code.

    The k positions with the smallest BEC(0.5) Bhattacharyya parameter carry
    data; ties go to the lower index.
    """
    _check_length(n)
    if not 1 <= k <= n:
        raise ValueError(f"message length must be in [1, {n}], got {k}")
    z = bhattacharyya_bec(n)
    order = np.lexsort((np.arange(n), z))
    mask = np.ones(n, dtype=bool)
    mask[order[:k]] = False
    return mask


@dataclass(frozen=True, eq=False)
class PolarCode:
    n: int
    k: int
    frozen_mask: np.ndarray
    generator: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n: int, k: int) -> "PolarCode":
        d = _check_length(n)
        mask = select_frozen(n, k)
        mask.flags.writeable = False
        gen = build_generator(d)
        gen.flags.writeable = False
        return cls(n=n, k=k, frozen_mask=mask, generator=gen)

    @property
    def d(self) -> int:
        return self.n.bit_length() - 1

    @property
    def frozen_positions(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)

    @property
    def data_positions(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(
            self.frozen_mask, other.frozen_mask
        )

    def __hash__(self):
        return hash((self.n, self.k, self.frozen_mask.tobytes()))


def scatter(code: PolarCode, m) -> np.ndarray:
    """Place message bits at the data positions; frozen positions stay zero."""
    m = np.asarray(m, dtype=np.uint8)
    if m.shape != (code.k,):
        raise ValueError(f"message must have length {code.k}, got shape {m.shape}")
    u = np.zeros(code.n, dtype=np.uint8)
    u[code.data_positions] = m
    return u


def gf2_matmul(u, g) -> np.ndarray:
    return (np.asarray(u, dtype=np.int64) @ np.asarray(g, dtype=np.int64) % 2).astype(np.uint8)


def encode(code: PolarCode, m) -> tuple[np.ndarray, np.ndarray]:
    """Encode message bits; returns the input vector ``u`` and codeword ``x = u G_N``."""
    u = scatter(code, m)
    return u, gf2_matmul(u, code.generator)


def xor_network(n: int) -> list[tuple[int, int]]:
    """Encoder XOR operations as ``(source, destination)`` pairs in execution order.

    Stages run with stride 1, 2, ..., n/2; each operation does
    ``v[dst] ^= v[src]`` with ``dst = src - stride``.
    """
    _check_length(n)
    ops = []
    stride = 1
    while stride < n:
        for i in range(n):
            if not i & stride:
                ops.append((i + stride, i))
        stride *= 2
    return ops


def butterfly_encode(u) -> np.ndarray:
    """Evaluate ``u G_N`` by running the XOR butterfly directly."""
    v = np.array(u, dtype=np.uint8)
    for src, dst in xor_network(v.size):
        v[dst] ^= v[src]
    return v
