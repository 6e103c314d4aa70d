"""BPSK over AWGN and the per-bit soft probabilities fed to the decoder."""

from __future__ import annotations

import numpy as np


def modulate_bpsk(x) -> np.ndarray:
    """Map bit 0 to -1.0 and bit 1 to +1.0."""
    x = np.asarray(x)
    if x.size and not np.isin(x, (0, 1)).all():
        raise ValueError("codeword entries must be 0 or 1")
    return 2.0 * x.astype(float) - 1.0


def transmit(symbols, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) noise to each symbol."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    symbols = np.asarray(symbols, dtype=float)
    return symbols + sigma * rng.standard_normal(symbols.shape)


def bit_prob_one(y, sigma: float):
    """P(bit = 1 | y) = 1 / (1 + exp(-2 y / sigma^2)).

    Works on scalars and arrays; saturates cleanly to 0 or 1.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    t = 2.0 * np.asarray(y, dtype=float) / (sigma * sigma)
    # exp only ever sees a non-positive argument
    e = np.exp(-np.abs(t))
    p = np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(p) if p.ndim == 0 else p


def llr(y, sigma: float):
    """log(P(bit=0|y) / P(bit=1|y)) = -2 y / sigma^2."""
    return -2.0 * np.asarray(y, dtype=float) / (sigma * sigma)


def snr_db_to_sigma(snr_db: float) -> float:
    """Noise std for unit-energy symbols with SNR = Es / sigma^2."""
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    return float(np.sqrt(10.0 ** (-snr_db / 10.0)))
