import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qpolar.channel import bit_prob_one, llr, modulate_bpsk, snr_db_to_sigma, transmit


def test_modulate():
    assert modulate_bpsk([0, 0]).tolist() == [-1.0, -1.0]
    assert modulate_bpsk([1, 0, 1]).tolist() == [1.0, -1.0, 1.0]


def test_modulate_rejects_non_bits():
    with pytest.raises(ValueError):
        modulate_bpsk([0, 2])


def test_hard_decision_round_trip(rng):
    x = rng.integers(0, 2, 64)
    assert np.array_equal((modulate_bpsk(x) > 0).astype(int), x)


def test_transmit_tiny_sigma_is_identity(rng):
    s = modulate_bpsk([1, 0, 1, 1])
    assert np.allclose(transmit(s, 1e-300, rng), s, rtol=0, atol=1e-290)


def test_transmit_deterministic():
    s = modulate_bpsk([1, 0, 1, 1, 0, 0, 1, 0])
    a = transmit(s, 0.7, np.random.default_rng(5))
    b = transmit(s, 0.7, np.random.default_rng(5))
    assert a.tobytes() == b.tobytes()


def test_transmit_noise_moments():
    sigma = 0.8
    noise = transmit(np.zeros(1_000_000), sigma, np.random.default_rng(11))
    # 1% of sigma^2 for the variance; the mean is compared on the sigma scale
    assert abs(noise.mean()) < 0.01 * sigma
    assert abs(noise.var() - sigma**2) < 0.01 * sigma**2


@pytest.mark.parametrize("sigma", [0.0, -1.0])
def test_transmit_rejects_bad_sigma(sigma, rng):
    with pytest.raises(ValueError):
        transmit([1.0], sigma, rng)


def test_bit_prob_values():
    assert bit_prob_one(0.0, 1.0) == 0.5
    assert bit_prob_one(1.0, 1.0) == pytest.approx(1 / (1 + math.exp(-2)), abs=1e-15)
    assert bit_prob_one(1.0, 1.0) == pytest.approx(0.880797, abs=1e-6)


def test_bit_prob_saturates():
    assert bit_prob_one(1e6, 0.01) == 1.0
    assert bit_prob_one(-1e6, 0.01) == 0.0
    assert bit_prob_one(np.inf, 1.0) == 1.0
    assert bit_prob_one(-np.inf, 1.0) == 0.0


def test_bit_prob_vectorized():
    p = bit_prob_one(np.array([-1.0, 0.0, 1.0]), 1.0)
    assert p.shape == (3,)
    assert p[1] == 0.5


@given(y=st.floats(-50, 50, allow_nan=False), sigma=st.floats(0.3, 5))
def test_bit_prob_symmetry_and_llr(y, sigma):
    p = bit_prob_one(y, sigma)
    q = bit_prob_one(-y, sigma)
    assert 0.0 <= p <= 1.0
    assert p + q == pytest.approx(1.0, abs=1e-15)
    t = llr(y, sigma)
    if abs(t) <= 5:
        # 1 - p is well conditioned here
        assert math.log((1 - p) / p) == pytest.approx(t, abs=1e-12)
    tiny = np.finfo(float).tiny
    if p >= tiny and q >= tiny:
        # complement via symmetry stays exact far into the tails; subnormals lose bits
        assert math.log(q) - math.log(p) == pytest.approx(t, rel=1e-12, abs=1e-12)


@given(a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_bit_prob_monotone(a, b):
    if a < b:
        assert bit_prob_one(a, 1.0) <= bit_prob_one(b, 1.0)


def test_snr_conversion():
    assert snr_db_to_sigma(0.0) == 1.0
    assert snr_db_to_sigma(10.0) ** 2 == pytest.approx(0.1, rel=1e-12)
    assert snr_db_to_sigma(20.0) == pytest.approx(0.1, rel=1e-12)
    with pytest.raises(ValueError):
        snr_db_to_sigma(float("nan"))
