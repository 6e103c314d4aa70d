"""Monte-Carlo BER/BLER sweeps comparing the quantum decoder with brute-force ML."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .channel import modulate_bpsk, snr_db_to_sigma, transmit
from .mlref import ml_decode
from .polar import PolarCode, encode
from .qgated import DecoderConfig, decode
from .qsim import NoiseModel

log = logging.getLogger(__name__)

SNR_CONVENTION = "Es/N0"
TIE_GAP = 1e-9

# spawn-key roots for the two independent stream families
_CHANNEL, _SHOTS = 0, 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    n: int = 8
    k: int = 4
    snr_db_list: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    p_bitflip_list: tuple[float, ...] = (0.0,)
    problems: int = 1000
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    seed: int = 0
    out: str | None = None
    workers: int = 1
    log_problems: str | None = None
    record_timing: bool = False

    def validate(self) -> None:
        if self.problems < 1:
            raise ConfigError("problems must be >= 1")
        if not self.snr_db_list or not self.p_bitflip_list:
            raise ConfigError("SNR and noise lists must be non-empty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        for p in self.p_bitflip_list:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"bit-flip probability {p} outside [0, 1]")
        if self.decoder.ideal_mode and any(p > 0 for p in self.p_bitflip_list):
            raise ConfigError("ideal mode cannot be combined with gate noise")
        try:
            PolarCode.build(self.n, self.k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class EvalRecord:
    snr_db: float
    p_bitflip: float
    problems: int
    shots: int
    bit_errors: int
    block_errors: int
    ber: float
    bler: float
    ml_bit_errors: int
    ml_block_errors: int
    ml_ber: float
    ml_bler: float
    wall_seconds: float | None = None


CSV_FIELDS = [f.name for f in fields(EvalRecord)]
PROBLEM_FIELDS = ["snr_db", "p_bitflip", "problem", "bit_errors", "block_error",
                  "ml_bit_errors", "ml_block_error", "ml_gap"]


def problem_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _solve_chunk(args):
    """Worker entry point: decode problems ``lo..hi-1`` of one grid point."""
    cfg, snr_idx, noise_idx, lo, hi = args
    code = PolarCode.build(cfg.n, cfg.k)
    snr = cfg.snr_db_list[snr_idx]
    noise = NoiseModel(cfg.p_bitflip_list[noise_idx])
    sigma = snr_db_to_sigma(snr)
    rows = []
    for j in range(lo, hi):
        # channel and shot draws depend on (SNR, problem) only, so every noise
        # level sees the same received words and the same shot uniforms
        ch = problem_rng(cfg.seed, _CHANNEL, snr_idx, j)
        m = ch.integers(0, 2, code.k, dtype=np.uint8)
        _, x = encode(code, m)
        y = transmit(modulate_bpsk(x), sigma, ch)
        shots_rng = problem_rng(cfg.seed, _SHOTS, snr_idx, j)
        res = decode(code, y, sigma, cfg.decoder, shots_rng, noise)
        ml = ml_decode(code, y, sigma)
        # an invalid decision counts its frozen-bit errors as a block error
        bit_err = int(np.sum(res.m_hat != m))
        block_err = int(bit_err > 0 or bool(np.any(res.u_hat[code.frozen_mask])))
        ml_bit_err = int(np.sum(ml.m_hat != m))
        rows.append((j, bit_err, block_err, ml_bit_err, int(ml_bit_err > 0), ml.runner_up_gap))
    return rows


def _chunks(problems: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(problems / (workers * 4)))
    return [(lo, min(problems, lo + size)) for lo in range(0, problems, size)]


def evaluate_point(cfg: SweepConfig, snr_idx: int, noise_idx: int, pool=None):
    """Per-problem outcomes for one grid point, ordered by problem index."""
    jobs = [(cfg, snr_idx, noise_idx, lo, hi) for lo, hi in _chunks(cfg.problems, cfg.workers)]
    results = pool.map(_solve_chunk, jobs) if pool is not None else map(_solve_chunk, jobs)
    return [row for chunk in results for row in chunk]


def aggregate(rows, snr_db: float, p_bitflip: float, k: int, shots: int) -> EvalRecord:
    problems = len(rows)
    bit = sum(r[1] for r in rows)
    block = sum(r[2] for r in rows)
    ml_bit = sum(r[3] for r in rows)
    ml_block = sum(r[4] for r in rows)
    return EvalRecord(
        snr_db=snr_db, p_bitflip=p_bitflip, problems=problems, shots=shots,
        bit_errors=bit, block_errors=block,
        ber=bit / (problems * k), bler=block / problems,
        ml_bit_errors=ml_bit, ml_block_errors=ml_block,
        ml_ber=ml_bit / (problems * k), ml_bler=ml_block / problems,
    )


def _cell(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def format_csv(records: list[EvalRecord], cfg: SweepConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# snr_convention={SNR_CONVENTION}\n")
    buf.write(f"# seed={cfg.seed}\n")
    buf.write("# ber_bits=message\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([_cell(getattr(r, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def run_sweep(cfg: SweepConfig) -> list[EvalRecord]:
    """Evaluate every (SNR, noise) grid point; writes CSV to ``cfg.out`` when set.

    Output is a pure function of the config: workers only change wall time.
    """
    cfg.validate()
    if cfg.out is not None:
        _check_writable(cfg.out)
    if cfg.log_problems is not None:
        _check_writable(cfg.log_problems)
    records: list[EvalRecord] = []
    problem_log: list[list] = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for si, snr in enumerate(cfg.snr_db_list):
            for ni, pn in enumerate(cfg.p_bitflip_list):
                t0 = time.perf_counter()
                rows = evaluate_point(cfg, si, ni, pool)
                rec = aggregate(rows, snr, pn, cfg.k, cfg.decoder.shots)
                elapsed = time.perf_counter() - t0
                if cfg.record_timing:
                    rec.wall_seconds = elapsed
                log.info("snr=%g dB p=%g ber=%.3g bler=%.3g ml_ber=%.3g (%.1fs)",
                         snr, pn, rec.ber, rec.bler, rec.ml_ber, elapsed)
                records.append(rec)
                if cfg.log_problems is not None:
                    problem_log.extend([snr, pn, *r] for r in rows)
    finally:
        if pool is not None:
            pool.shutdown()
    if cfg.out is not None:
        Path(cfg.out).write_text(format_csv(records, cfg))
    if cfg.log_problems is not None:
        with open(cfg.log_problems, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(PROBLEM_FIELDS)
            w.writerows([_cell(v) for v in row] for row in problem_log)
    return records


def _check_writable(path) -> None:
    p = Path(path)
    if p.is_dir() or not p.parent.exists():
        raise OSError(f"cannot write output to {path}")


def with_decoder(cfg: SweepConfig, **changes) -> SweepConfig:
    return replace(cfg, decoder=replace(cfg.decoder, **changes))
