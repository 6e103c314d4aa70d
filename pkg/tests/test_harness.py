import csv
import math
from dataclasses import replace

import pytest

from qpolar import cli
from qpolar.circuit import parse_text
from qpolar.harness import (
    CSV_FIELDS,
    ConfigError,
    SweepConfig,
    format_csv,
    read_csv,
    run_sweep,
    with_decoder,
)
from qpolar.qgated import DecoderConfig


def small(**kw):
    base = SweepConfig(snr_db_list=(1.0, 4.0), problems=20, decoder=DecoderConfig(shots=50), seed=3)
    return replace(base, **kw)


def test_config_validation():
    for bad in (dict(problems=0), dict(snr_db_list=()), dict(workers=0), dict(seed=-1),
                dict(p_bitflip_list=(1.5,)), dict(n=6), dict(k=9)):
        with pytest.raises(ConfigError):
            small(**bad).validate()
    with pytest.raises(ConfigError):
        with_decoder(small(p_bitflip_list=(0.1,)), ideal_mode=True).validate()


def test_high_snr_ideal_is_error_free():
    recs = run_sweep(with_decoder(small(snr_db_list=(60.0,)), ideal_mode=True))
    assert recs[0].ber == 0 and recs[0].bler == 0
    assert recs[0].ml_ber == 0


def test_ideal_errors_equal_ml():
    cfg = with_decoder(small(snr_db_list=(0.0, 2.5), problems=100), ideal_mode=True)
    for r in run_sweep(cfg):
        assert r.bit_errors == r.ml_bit_errors
        assert r.block_errors == r.ml_block_errors


def test_record_invariants():
    for r in run_sweep(small(p_bitflip_list=(0.0, 0.05))):
        assert r.ber == r.bit_errors / (r.problems * 4)
        assert r.bler == r.block_errors / r.problems
        assert 0 <= r.ber <= 1 and 0 <= r.bler <= 1
        assert r.shots == 50 and r.problems == 20
        assert r.wall_seconds is None


def test_csv_schema(tmp_path):
    out = tmp_path / "r.csv"
    cfg = small(out=str(out))
    recs = run_sweep(cfg)
    text = out.read_text()
    lines = text.splitlines()
    assert lines[0] == "# snr_convention=Es/N0"
    assert lines[1] == "# seed=3"
    assert lines[3] == ",".join(CSV_FIELDS)
    assert text == format_csv(recs, cfg)
    rows = read_csv(out)
    assert len(rows) == 2
    assert float(rows[1]["snr_db"]) == 4.0
    assert rows[0]["wall_seconds"] == ""


def test_record_timing(tmp_path):
    recs = run_sweep(small(record_timing=True, problems=2))
    assert all(r.wall_seconds > 0 for r in recs)


def test_determinism_across_workers(tmp_path):
    outs = []
    for workers in (1, 1, 3):
        path = tmp_path / f"r{len(outs)}.csv"
        run_sweep(small(p_bitflip_list=(0.0, 0.02), workers=workers, out=str(path)))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_changes_output(tmp_path):
    a = format_csv(run_sweep(small(problems=50)), small())
    b = format_csv(run_sweep(small(problems=50, seed=4)), small())
    assert a.splitlines()[4:] != b.splitlines()[4:]


def test_problem_log_aggregates(tmp_path):
    log = tmp_path / "p.csv"
    recs = run_sweep(small(p_bitflip_list=(0.0, 0.1), log_problems=str(log)))
    with open(log, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4 * 20
    for r in recs:
        mine = [x for x in rows if float(x["snr_db"]) == r.snr_db and float(x["p_bitflip"]) == r.p_bitflip]
        assert sorted(int(x["problem"]) for x in mine) == list(range(20))
        assert sum(int(x["bit_errors"]) for x in mine) == r.bit_errors
        assert sum(int(x["block_error"]) for x in mine) == r.block_errors
        assert sum(int(x["ml_bit_errors"]) for x in mine) == r.ml_bit_errors
        assert sum(int(x["ml_block_error"]) for x in mine) == r.ml_block_errors
        assert sum(int(x["bit_errors"]) for x in mine) / (20 * 4) == r.ber


def test_unwritable_output(tmp_path):
    with pytest.raises(OSError):
        run_sweep(small(out=str(tmp_path / "missing" / "r.csv")))


# -- CLI --------------------------------------------------------------------


def test_cli_sweep_grid(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["sweep", "--n", "8", "--k", "4", "--snr-db", "0,2.5,5", "--noise-p", "0,0.001",
                     "--problems", "5", "--shots", "20", "--seed", "7", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 6
    assert [(float(r["snr_db"]), float(r["p_bitflip"])) for r in rows] == [
        (s, p) for s in (0, 2.5, 5) for p in (0, 0.001)]
    assert "wrote 6 rows" in capsys.readouterr().out


def test_cli_config_file_and_override(tmp_path):
    conf = tmp_path / "c.cfg"
    out = tmp_path / "r.csv"
    conf.write_text(f"# sweep settings\nsnr-db = 1,2\nproblems = 4\nshots = 10\nseed = 5\nout = {out}\n"
                    "angle-quantum = pi/64\n")
    assert cli.main(["sweep", "--config", str(conf)]) == 0
    assert len(read_csv(out)) == 2
    assert cli.main(["sweep", "--config", str(conf), "--snr-db", "3"]) == 0
    rows = read_csv(out)
    assert len(rows) == 1 and float(rows[0]["snr_db"]) == 3.0
    assert out.read_text().splitlines()[1] == "# seed=5"


def test_cli_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "c.cfg"
    conf.write_text("colour = blue\n")
    assert cli.main(["sweep", "--config", str(conf)]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_decode_smoke(capsys):
    assert cli.main(["decode", "--n", "8", "--k", "4", "--snr-db", "1.5", "--ideal", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    for key in ("theta_rt", "lambda", "decision", "histogram"):
        assert key in out
    assert "\nm " in out


def test_cli_decode_with_y(capsys):
    # negative values need the --y=... spelling
    assert cli.main(["decode", "--y=-1,-1,-1,-1,-1,-1,-1,-1", "--snr-db", "3"]) == 0
    assert "m=0000" in capsys.readouterr().out


def test_cli_ml(capsys):
    assert cli.main(["ml", "--y", "1,1,1,1,1,1,1,1", "--snr-db", "3"]) == 0
    out = capsys.readouterr().out
    # the all-ones codeword is the last generator row, u = e_7
    assert "u=00000001 m=0001" in out and "runner_up_gap" in out


def test_cli_export_round_trip(tmp_path, capsys):
    p = ",".join(["0.5"] * 8)
    assert cli.main(["export-circuit", "--n", "8", "--k", "4", "--p", p]) == 0
    text = capsys.readouterr().out
    circ = parse_text(text)
    assert circ.n_qubits == 8
    assert circ.count("MCP") > 0
    out = tmp_path / "c.txt"
    assert cli.main(["export-circuit", "--p", p, "--optimize", "--out", str(out)]) == 0
    assert len(parse_text(out.read_text())) < len(circ)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["sweep", "--problems", "x"],
    ["sweep", "--problems", "0"],
    ["sweep", "--n", "6"],
    ["decode", "--y", "1,2"],
    ["export-circuit", "--p", "0.5,2"],
    ["sweep", "--angle-quantum", "fast"],
    ["decode", "--snr-db", "1,2"],
])
def test_cli_usage_errors(argv, capsys):
    assert cli.main(argv) == 1
    assert capsys.readouterr().err


def test_cli_runtime_error(tmp_path, capsys):
    argv = ["sweep", "--problems", "1", "--out", str(tmp_path / "nope" / "r.csv")]
    assert cli.main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_parse_angle():
    assert cli.parse_angle("pi/128") == math.pi / 128
    assert cli.parse_angle("2*pi/128") == math.pi / 64
    assert cli.parse_angle("0") == 0.0
    assert cli.parse_angle("0.01") == 0.01
