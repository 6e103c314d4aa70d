"""Brute-force maximum-likelihood decoding over the full codebook."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .polar import PolarCode, gf2_matmul

MAX_K = 20

P_MIN = 1e-300
P_MAX = 1.0 - 1e-16


@dataclass(frozen=True)
class Codebook:
    messages: np.ndarray   # (2^k, k); row j is the little-endian bits of j
    inputs: np.ndarray     # (2^k, n)
    codewords: np.ndarray  # (2^k, n)


@lru_cache(maxsize=32)
def _codebook(code: PolarCode) -> Codebook:
    if code.k > MAX_K:
        raise ValueError(f"codebook enumeration limited to k <= {MAX_K}, got k={code.k}")
    j = np.arange(1 << code.k)
    msgs = ((j[:, None] >> np.arange(code.k)) & 1).astype(np.uint8)
    u = np.zeros((j.size, code.n), dtype=np.uint8)
    u[:, code.data_positions] = msgs
    x = gf2_matmul(u, code.generator)
    for a in (msgs, u, x):
        a.flags.writeable = False
    return Codebook(msgs, u, x)


def codebook(code: PolarCode) -> Codebook:
    return _codebook(code)


@dataclass(frozen=True)
class MlDecision:
    m_hat: np.ndarray
    u_hat: np.ndarray
    log_likelihood: float
    runner_up_gap: float

    @property
    def index(self) -> int:
        """Basis index of ``u_hat`` (bit i = u_i)."""
        return int(np.dot(self.u_hat.astype(np.int64), 1 << np.arange(self.u_hat.size)))


def log_likelihoods(code: PolarCode, y, sigma: float) -> np.ndarray:
    """Sum over bits of log P(bit | y_i) for every codeword, via stable log-sigmoids."""
    y = np.asarray(y, dtype=float)
    if y.shape != (code.n,):
        raise ValueError(f"soft vector must have length {code.n}")
    t = 2.0 * y / (sigma * sigma)
    log_p1 = -np.logaddexp(0.0, -t)
    log_p0 = -np.logaddexp(0.0, t)
    x = codebook(code).codewords
    return x @ log_p1 + (1 - x) @ log_p0


def _decision(code: PolarCode, scores: np.ndarray) -> MlDecision:
    cb = codebook(code)
    best = int(np.argmax(scores))  # first maximum, i.e. lowest message integer
    if scores.size > 1:
        top2 = np.partition(scores, -2)[-2:]
        gap = float(top2[1] - top2[0])
    else:
        gap = float("inf")
    return MlDecision(cb.messages[best].copy(), cb.inputs[best].copy(), float(scores[best]), gap)


def ml_decode(code: PolarCode, y, sigma: float) -> MlDecision:
    """Codeword maximizing the BPSK/AWGN likelihood of ``y``; ties go to the lowest message."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return _decision(code, log_likelihoods(code, y, sigma))


def ml_decode_distance(code: PolarCode, y) -> MlDecision:
    """Minimum Euclidean distance decision; ``log_likelihood`` holds the negated squared distance."""
    y = np.asarray(y, dtype=float)
    s = 2.0 * codebook(code).codewords.astype(float) - 1.0
    d2 = np.sum((y[None, :] - s) ** 2, axis=1)
    return _decision(code, -d2)


def codeword_log_probs(code: PolarCode, p) -> np.ndarray:
    """log prod_i p_i^x_i (1 - p_i)^(1 - x_i) for each codeword, p clamped away from 0 and 1."""
    p = np.clip(np.asarray(p, dtype=float), P_MIN, P_MAX)
    if p.shape != (code.n,):
        raise ValueError(f"probability vector must have length {code.n}")
    x = codebook(code).codewords
    return x @ np.log(p) + (1 - x) @ np.log1p(-p)


def posterior_over_valid(code: PolarCode, p) -> np.ndarray:
    """Normalized codeword probabilities, indexed by message integer."""
    p = np.asarray(p, dtype=float)
    x = codebook(code).codewords
    if p.shape == (code.n,):
        # a bit with p exactly 0 or 1 rules out every codeword disagreeing with it
        hard_one, hard_zero = p >= 1.0, p <= 0.0
        ruled_out = ((x == 0) & hard_one).any(axis=1) | ((x == 1) & hard_zero).any(axis=1)
        if ruled_out.all():
            raise ValueError("probability vector contradicts every codeword")
    lp = codeword_log_probs(code, p)
    w = np.exp(lp - lp.max())
    return w / w.sum()
