"""Quantum-gate ML decoding of polar codes by amplitude amplification.

Pipeline: per-bit probabilities -> RY angles -> reverse traversal -> repeated
frozen-bit-satisfaction blocks -> measurement and majority vote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .channel import bit_prob_one
from .circuit import CircuitIR, build_decoder, optimize
from .mlref import codebook
from .polar import PolarCode
from .qsim import NOISELESS, NoiseModel

DEFAULT_QUANTUM = math.pi / 128
ARCCOS_SLACK = 1e-9


class PhaseOutOfRange(ValueError):
    """The slow-rotation arccos argument fell outside [-1, 1]."""


@dataclass(frozen=True)
class DecoderConfig:
    max_fbs_blocks: int = 5
    angle_quantum: float = DEFAULT_QUANTUM
    shots: int = 1000
    ideal_mode: bool = False
    optimize_circuit: bool = False
    validity_epsilon: float = 1e-12

    def __post_init__(self):
        if self.max_fbs_blocks < 1:
            raise ValueError("max_fbs_blocks must be >= 1")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.angle_quantum < 0:
            raise ValueError("angle_quantum must be >= 0")


@dataclass
class DecodeResult:
    u_hat: np.ndarray
    m_hat: np.ndarray
    decision: int
    histogram: dict[int, int]
    theta_rt: float
    m_iterations: int
    lambdas: tuple[float, float] | None
    valid_mass_final: float | None = None
    capped: bool = False
    phase_fallback: bool = False


@dataclass
class DecoderPlan:
    thetas: np.ndarray
    p_valid: float
    theta_rt: float
    m_iterations: int
    phases: list[tuple[float, float]] = field(default_factory=list)
    capped: bool = False
    phase_fallback: bool = False
    circuit: CircuitIR | None = None

    @property
    def lambdas(self) -> tuple[float, float] | None:
        return self.phases[-1] if self.phases else None


def compute_angles(p, quantum: float = DEFAULT_QUANTUM) -> np.ndarray:
    """RY angles with sin^2(theta/2) = p, optionally snapped to multiples of ``quantum``.

    Snapping is to the nearest multiple, with exact halves going up.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    # atan2 keeps cos^2(theta/2) = 1 - p to full relative precision near p = 1,
    # where arcsin(sqrt(p)) is ill-conditioned
    theta = 2.0 * np.arctan2(np.sqrt(p), np.sqrt(1.0 - p))
    if quantum > 0:
        theta = quantum * np.floor(theta / quantum + 0.5)
    return theta


def angle_probs(thetas) -> np.ndarray:
    return np.sin(np.asarray(thetas, dtype=float) / 2.0) ** 2


def valid_probability(p, code: PolarCode) -> float:
    """Mass of the valid subspace after initialization and reverse traversal.

    After the reverse traversal, basis state |u> carries the amplitude of
    |x = u G_N>, so the valid mass is the total probability of the codebook.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (code.n,):
        raise ValueError(f"probability vector must have length {code.n}")
    x = codebook(code).codewords
    # direct product: snapped angles give p exactly 0 or 1
    per_bit = np.where(x == 1, p, 1.0 - p)
    return float(min(np.prod(per_bit, axis=1).sum(), 1.0))


def compute_theta_rt(p, code: PolarCode) -> float:
    return float(np.arcsin(np.sqrt(valid_probability(p, code))))


def compute_iterations(theta_rt: float, max_blocks: int | None = None) -> int:
    """Full iterations before the slow rotation, ceil(pi / (4 theta) - 1/2).

    With ``max_blocks`` the total block count m + 1 is capped at it.
    """
    if not theta_rt > 0:
        raise ValueError(f"theta_rt must be positive, got {theta_rt}")
    m = max(0, math.ceil(math.pi / (4.0 * theta_rt) - 0.5))
    if max_blocks is not None:
        m = min(m, max_blocks - 1)
    return m


def slow_rotation_phases(theta_rt: float, m: int) -> tuple[float, float]:
    """MCPhase angles for the final partial rotation after ``m`` full iterations."""
    if not 0 < theta_rt < math.pi / 2:
        raise ValueError(f"theta_rt must lie in (0, pi/2), got {theta_rt}")
    arg = -(1.0 / math.tan(2 * theta_rt)) / math.tan((2 * m + 1) * theta_rt)
    if not abs(arg) <= 1.0 + ARCCOS_SLACK:
        raise PhaseOutOfRange(f"arccos argument {arg:.6g} out of range (theta={theta_rt}, m={m})")
    lam1 = math.acos(min(1.0, max(-1.0, arg)))
    # 2 atan(a / b) written with atan2 so b = cos(2 theta) = 0 is fine; same branch
    lam2 = 2.0 * math.atan2(-math.cos(lam1), math.sin(lam1) * math.cos(2 * theta_rt))
    if lam2 > math.pi:
        lam2 -= 2 * math.pi
    elif lam2 <= -math.pi:
        lam2 += 2 * math.pi
    return lam1, lam2


def schedule(theta_rt: float, max_blocks: int | None) -> tuple[int, list[tuple[float, float]], bool, bool]:
    """Return ``(m, phases, capped, fallback)`` for the FBS stage.

    ``phases`` holds ``m`` entries of ``(pi, pi)`` followed by the slow rotation.
    """
    raw = compute_iterations(theta_rt)
    m = raw if max_blocks is None else min(raw, max_blocks - 1)
    capped = m < raw
    fallback = False
    try:
        final = slow_rotation_phases(theta_rt, m)
    except PhaseOutOfRange:
        final = None
        if not capped:
            # near pi/2 the ceiling overshoots by one iteration; the slow
            # rotation alone then closes the remaining angle
            while final is None and m > 0:
                m -= 1
                try:
                    final = slow_rotation_phases(theta_rt, m)
                except PhaseOutOfRange:
                    pass
        if final is None:
            final = (math.pi, math.pi)
            fallback = True
    return m, [(math.pi, math.pi)] * m + [final], capped, fallback


def prepare(code: PolarCode, p, cfg: DecoderConfig) -> DecoderPlan:
    """Angles, amplification schedule and circuit for one received word."""
    p = np.asarray(p, dtype=float)
    if p.shape != (code.n,):
        raise ValueError(f"probability vector must have length {code.n}")
    quantum = 0.0 if cfg.ideal_mode else cfg.angle_quantum
    thetas = compute_angles(p, quantum)
    # the amplification schedule must match the state the circuit actually prepares
    p_eff = angle_probs(thetas) if quantum > 0 else p
    p_valid = valid_probability(p_eff, code)
    theta_rt = float(np.arcsin(np.sqrt(p_valid)))
    plan = DecoderPlan(thetas=thetas, p_valid=p_valid, theta_rt=theta_rt, m_iterations=0)
    needs_fbs = code.frozen_mask.any() and 0.0 < p_valid <= 1.0 - cfg.validity_epsilon
    if needs_fbs:
        cap = None if cfg.ideal_mode else cfg.max_fbs_blocks
        plan.m_iterations, plan.phases, plan.capped, plan.phase_fallback = schedule(theta_rt, cap)
    circ = build_decoder(code, thetas, plan.phases)
    if cfg.optimize_circuit:
        circ = optimize(circ, code.frozen_mask)
    plan.circuit = circ
    return plan


def modal_index(histogram: dict[int, int]) -> int:
    """Most frequent outcome; ties go to the lowest basis index."""
    return min(histogram, key=lambda i: (-histogram[i], i))


def decode_probs(code: PolarCode, p, cfg: DecoderConfig, rng: np.random.Generator,
                 noise: NoiseModel = NOISELESS) -> DecodeResult:
    plan = prepare(code, p, cfg)
    n = code.n
    gates = plan.circuit.gates
    valid_mass = None
    if cfg.ideal_mode:
        if noise.p_bitflip > 0:
            raise ValueError("ideal mode is noiseless")
        state = qsim.run_circuit(qsim.init_zero(n), gates)
        probs = state.probabilities
        decision = int(np.argmax(probs))
        valid_mass = qsim.subspace_probability(state, code.frozen_mask)
        histogram = qsim.measure_shots(state, cfg.shots, rng)
    else:
        # noiseless shots go through the same sampler so that one rng state
        # gives coupled histograms at every noise level
        histogram = qsim.sample_noisy(n, gates, noise, cfg.shots, rng)
        decision = modal_index(histogram)
    u_hat = ((decision >> np.arange(n)) & 1).astype(np.uint8)
    return DecodeResult(
        u_hat=u_hat,
        m_hat=u_hat[code.data_positions],
        decision=decision,
        histogram=histogram,
        theta_rt=plan.theta_rt,
        m_iterations=plan.m_iterations,
        lambdas=plan.lambdas,
        valid_mass_final=valid_mass,
        capped=plan.capped,
        phase_fallback=plan.phase_fallback,
    )


def decode(code: PolarCode, y, sigma: float, cfg: DecoderConfig, rng: np.random.Generator,
           noise: NoiseModel = NOISELESS) -> DecodeResult:
    """Decode received soft values ``y`` sent over AWGN with noise std ``sigma``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (code.n,):
        raise ValueError(f"soft vector must have length {code.n}, got shape {y.shape}")
    return decode_probs(code, bit_prob_one(y, sigma), cfg, rng, noise)
