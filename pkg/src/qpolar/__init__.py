"""Statevector simulation of quantum-gate maximum-likelihood polar decoding."""

from .channel import bit_prob_one, modulate_bpsk, snr_db_to_sigma, transmit
from .circuit import CircuitIR, build_decoder, export_text, optimize, parse_text
from .harness import EvalRecord, SweepConfig, run_sweep
from .mlref import MlDecision, ml_decode, posterior_over_valid
from .polar import PolarCode, build_generator, encode, select_frozen
from .qgated import DecodeResult, DecoderConfig, decode, prepare
from .qsim import Gate, NoiseModel, StateVector, init_zero, run_circuit

__version__ = "0.1.0"

__all__ = [
    "CircuitIR", "DecodeResult", "DecoderConfig", "EvalRecord", "Gate", "MlDecision",
    "NoiseModel", "PolarCode", "StateVector", "SweepConfig", "bit_prob_one",
    "build_decoder", "build_generator", "decode", "encode", "export_text", "init_zero",
    "ml_decode", "modulate_bpsk", "optimize", "parse_text", "posterior_over_valid",
    "prepare", "run_circuit", "run_sweep", "select_frozen", "snr_db_to_sigma", "transmit",
]
