"""Command line entry point: ``qpolar {sweep,decode,export-circuit,ml}``."""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from .channel import bit_prob_one, modulate_bpsk, snr_db_to_sigma, transmit
from .circuit import export_text
from .harness import ConfigError, SweepConfig, problem_rng, run_sweep
from .mlref import ml_decode
from .polar import PolarCode, encode
from .qgated import DEFAULT_QUANTUM, DecoderConfig, decode, prepare
from .qsim import NoiseModel

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

BOOL_KEYS = {"ideal", "optimize", "record-timing"}
KNOWN_KEYS = {
    "n", "k", "snr-db", "noise-p", "shots", "problems", "seed", "max-fbs-blocks",
    "angle-quantum", "ideal", "optimize", "workers", "out", "log-problems", "record-timing",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_angle(text: str) -> float:
    """A float, or ``pi/<int>`` / ``<real>*pi/<int>``."""
    s = text.strip().lower()
    m = re.fullmatch(r"(?:([0-9.eE+-]+)\s*\*\s*)?pi\s*/\s*([0-9.]+)", s)
    if m:
        scale = float(m.group(1)) if m.group(1) else 1.0
        return scale * math.pi / float(m.group(2))
    value = float(s)
    if value < 0:
        raise ValueError("angle quantum must be >= 0")
    return value


def float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def load_config(path) -> dict[str, str]:
    """Flat ``key = value`` file keyed by CLI flag names; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key = key.strip().lstrip("-")
        if not sep or key not in KNOWN_KEYS:
            raise UsageError(f"{path}:{lineno}: cannot use {raw.strip()!r}")
        out[key] = value.strip()
    return out


def _truthy(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file using these flag names as keys")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--snr-db", help="comma separated list (sweep) or one value")
    p.add_argument("--noise-p", help="BitFlip probability P(X_e); comma list for sweep")
    p.add_argument("--shots", type=int)
    p.add_argument("--problems", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-fbs-blocks", type=int)
    p.add_argument("--angle-quantum", help="RY quantization step, e.g. pi/128; 0 disables")
    p.add_argument("--ideal", action="store_true", default=None,
                   help="exact statevector argmax, no cap, no quantization")
    p.add_argument("--optimize", action="store_true", default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpolar", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sw = sub.add_parser("sweep", help="BER/BLER sweep over SNR x noise, CSV output")
    _add_common(sw)
    sw.add_argument("--log-problems", help="per-problem CSV log")
    sw.add_argument("--record-timing", action="store_true", default=None,
                    help="fill wall_seconds (makes the CSV run-dependent)")
    for name, help_ in [("decode", "decode one random problem"),
                        ("export-circuit", "print the decoder circuit"),
                        ("ml", "brute-force ML decision for one problem")]:
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        sp.add_argument("--y", help="received soft values, comma separated (use --y=-1,... for a leading minus)")
        if name == "export-circuit":
            sp.add_argument("--p", help="per-bit P(bit = 1) values (comma separated)")
    return parser


def _settings(args) -> dict:
    """Config file values overridden by explicit flags."""
    conf = load_config(args.config) if args.config else {}
    for key in KNOWN_KEYS:
        attr = key.replace("-", "_")
        v = getattr(args, attr, None)
        if v is None or v is False:
            continue
        conf[key] = v
    return conf


def _get(conf, key, cast, default):
    if key not in conf:
        return default
    v = conf[key]
    if key in BOOL_KEYS:
        return v if isinstance(v, bool) else _truthy(v)
    try:
        return cast(v) if isinstance(v, str) else v
    except ValueError as exc:
        raise UsageError(f"bad value for --{key}: {v!r}") from exc


def _decoder_config(conf) -> DecoderConfig:
    try:
        return DecoderConfig(
            max_fbs_blocks=_get(conf, "max-fbs-blocks", int, 5),
            angle_quantum=_get(conf, "angle-quantum", parse_angle, DEFAULT_QUANTUM),
            shots=_get(conf, "shots", int, 1000),
            ideal_mode=_get(conf, "ideal", bool, False),
            optimize_circuit=_get(conf, "optimize", bool, False),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _single(conf, key, default):
    vals = _get(conf, key, float_list, None)
    if vals is None:
        return default
    if isinstance(vals, (int, float)):
        return float(vals)
    if len(vals) != 1:
        raise UsageError(f"--{key} takes a single value here")
    return vals[0]


def _code(conf) -> PolarCode:
    try:
        return PolarCode.build(_get(conf, "n", int, 8), _get(conf, "k", int, 4))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _problem(conf, code):
    """Received word from ``--y`` or a seeded random transmission at ``--snr-db``."""
    snr = _single(conf, "snr-db", 1.5)
    sigma = snr_db_to_sigma(snr)
    seed = _get(conf, "seed", int, 0)
    rng = problem_rng(seed, 0)
    if conf.get("y"):
        y = np.array(float_list(conf["y"]))
        if y.size != code.n:
            raise UsageError(f"--y needs {code.n} values")
        return None, y, sigma, rng
    m = rng.integers(0, 2, code.k, dtype=np.uint8)
    _, x = encode(code, m)
    return m, transmit(modulate_bpsk(x), sigma, rng), sigma, rng


def _bits(a) -> str:
    return "".join(str(int(b)) for b in a)


def cmd_sweep(conf) -> int:
    cfg = SweepConfig(
        n=_get(conf, "n", int, 8),
        k=_get(conf, "k", int, 4),
        snr_db_list=tuple(_get(conf, "snr-db", float_list, [0, 1, 2, 3, 4, 5])),
        p_bitflip_list=tuple(_get(conf, "noise-p", float_list, [0.0])),
        problems=_get(conf, "problems", int, 1000),
        decoder=_decoder_config(conf),
        seed=_get(conf, "seed", int, 0),
        out=conf.get("out", "sweep.csv"),
        workers=_get(conf, "workers", int, 1),
        log_problems=conf.get("log-problems"),
        record_timing=_get(conf, "record-timing", bool, False),
    )
    try:
        cfg.validate()
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    records = run_sweep(cfg)
    print(f"{'snr_db':>7} {'p_bitflip':>9} {'ber':>10} {'bler':>10} {'ml_ber':>10} {'ml_bler':>10}")
    for r in records:
        print(f"{r.snr_db:7g} {r.p_bitflip:9g} {r.ber:10.4g} {r.bler:10.4g} {r.ml_ber:10.4g} {r.ml_bler:10.4g}")
    print(f"wrote {len(records)} rows to {cfg.out}")
    return EXIT_OK


def cmd_decode(conf) -> int:
    code = _code(conf)
    cfg = _decoder_config(conf)
    noise = NoiseModel(_single(conf, "noise-p", 0.0))
    m, y, sigma, rng = _problem(conf, code)
    res = decode(code, y, sigma, cfg, rng, noise)
    print(f"code            n={code.n} k={code.k} frozen={code.frozen_positions.tolist()}")
    print(f"y               {np.array2string(y, precision=4)}")
    print(f"theta_rt        {res.theta_rt!r}")
    print(f"m               {res.m_iterations}" + (" (capped)" if res.capped else ""))
    if res.lambdas is None:
        print("lambda1 lambda2 - (no amplification needed)")
    else:
        print(f"lambda1         {res.lambdas[0]!r}")
        print(f"lambda2         {res.lambdas[1]!r}" + (" (fallback)" if res.phase_fallback else ""))
    if res.valid_mass_final is not None:
        print(f"valid mass      {res.valid_mass_final!r}")
    print(f"decision        |{res.decision}> u={_bits(res.u_hat)} m={_bits(res.m_hat)}")
    if m is not None:
        print(f"sent            m={_bits(m)}")
    print("histogram (top 8):")
    top = sorted(res.histogram.items(), key=lambda kv: (-kv[1], kv[0]))[:8]
    for idx, cnt in top:
        print(f"  |{idx:>{len(str(2 ** code.n))}}> {cnt}")
    return EXIT_OK


def cmd_export(conf) -> int:
    code = _code(conf)
    cfg = _decoder_config(conf)
    if conf.get("p"):
        p = np.array(float_list(conf["p"]))
        if p.size != code.n or np.any((p < 0) | (p > 1)):
            raise UsageError(f"--p needs {code.n} probabilities in [0, 1]")
    else:
        _, y, sigma, _ = _problem(conf, code)
        p = bit_prob_one(y, sigma)
    text = export_text(prepare(code, p, cfg).circuit)
    if conf.get("out"):
        Path(conf["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ml(conf) -> int:
    code = _code(conf)
    m, y, sigma, _ = _problem(conf, code)
    d = ml_decode(code, y, sigma)
    print(f"decision        |{d.index}> u={_bits(d.u_hat)} m={_bits(d.m_hat)}")
    print(f"log_likelihood  {d.log_likelihood!r}")
    print(f"runner_up_gap   {d.runner_up_gap!r}")
    if m is not None:
        print(f"sent            m={_bits(m)}")
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "decode": cmd_decode, "export-circuit": cmd_export, "ml": cmd_ml}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        conf = _settings(args)
        for extra in ("y", "p"):
            if getattr(args, extra, None):
                conf[extra] = getattr(args, extra)
        return COMMANDS[args.command](conf)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
