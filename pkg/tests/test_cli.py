"""Command-line interface: exit codes, config handling, artifacts."""

import csv
import json
import os

import pytest

from surgesim import cli


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(d))
    return d


def test_parse_lists():
    assert cli._parse_int_list("1..5") == [1, 2, 3, 4, 5]
    assert cli._parse_int_list("1,3,9") == [1, 3, 9]
    assert cli._parse_float_list("0.01,0.02") == [0.01, 0.02]


def test_fault_distance_command(capsys):
    rc = cli.main(["fault-distance", "--protocol", "zz", "--d", "5",
                   "--h2", "5"])
    assert rc == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "5"
    rc = cli.main(["fault-distance", "--protocol", "zz", "--d", "5",
                   "--h2", "2"])
    assert rc == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "2"
    rc = cli.main(["fault-distance", "--protocol", "memory", "--d", "3"])
    assert capsys.readouterr().out.strip() == "3"
    assert rc == cli.EXIT_OK


def test_missing_required_flag_is_config_error(capsys):
    rc = cli.main(["zz-sweep", "--p", "0.01"])
    assert rc == cli.EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert "required" in err["error"]


def test_invalid_noise_is_config_error(capsys):
    rc = cli.main(["zz-sweep", "--d", "3", "--h2", "1,3", "--p", "0.7"])
    assert rc == cli.EXIT_CONFIG
    assert "error" in json.loads(capsys.readouterr().err)


def test_zz_sweep_writes_artifacts(out_dir, capsys):
    rc = cli.main(["zz-sweep", "--d", "3", "--h2", "1,3", "--p", "0.02",
                   "--shots", "2000", "--seed", "5"])
    assert rc == cli.EXIT_OK
    csv_path = out_dir / "zz_sweep_d3_w1_independent_p0.02_q0.02.csv"
    json_path = out_dir / "zz_sweep_d3_w1_independent_p0.02_q0.02.json"
    assert csv_path.exists() and json_path.exists()
    with open(csv_path) as f:
        rows = list(csv.DictReader(f))
    assert [r["h2"] for r in rows] == ["1", "3"]
    assert all(r["shots"] == "2000" for r in rows)
    out = capsys.readouterr().out
    assert "h2=1" in out and "h2=3" in out
    payload = json.loads(json_path.read_text())
    assert payload["command"] == "zz-sweep"
    assert payload["noise"]["p"] == 0.02


def test_csv_deterministic_across_runs(out_dir):
    args = ["zz-sweep", "--d", "3", "--h2", "1,3", "--p", "0.02",
            "--shots", "2000", "--seed", "5"]
    assert cli.main(args) == cli.EXIT_OK
    csv_path = out_dir / "zz_sweep_d3_w1_independent_p0.02_q0.02.csv"
    first = csv_path.read_bytes()
    assert cli.main(args) == cli.EXIT_OK
    assert csv_path.read_bytes() == first


def test_config_file_and_flag_precedence(out_dir, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 3, "h2": "1,3", "p": 0.02,
                               "shots": 2000, "seed": 5}))
    rc = cli.main(["zz-sweep", "--config", str(cfg)])
    assert rc == cli.EXIT_OK
    capsys.readouterr()
    # explicit flag overrides the file value
    rc = cli.main(["zz-sweep", "--config", str(cfg), "--p", "0.03"])
    assert rc == cli.EXIT_OK
    assert (out_dir / "zz_sweep_d3_w1_independent_p0.03_q0.03.csv").exists()
    # unknown keys are rejected
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    rc = cli.main(["zz-sweep", "--config", str(bad), "--d", "3",
                   "--h2", "1", "--p", "0.02"])
    assert rc == cli.EXIT_CONFIG
    assert "nonsense" in json.loads(capsys.readouterr().err)["error"]


def test_output_dir_flag_beats_env(out_dir, tmp_path):
    other = tmp_path / "other"
    rc = cli.main(["zz-sweep", "--d", "3", "--h2", "1", "--p", "0.02",
                   "--shots", "1000", "--output-dir", str(other)])
    assert rc == cli.EXIT_OK
    assert (other / "zz_sweep_d3_w1_independent_p0.02_q0.02.csv").exists()
    assert not out_dir.exists()


def test_cap_exhaustion_exit_code(out_dir, capsys):
    rc = cli.main(["zz-sweep", "--d", "3", "--h2", "1", "--p", "0.0001",
                   "--min-failures", "1000", "--cap", "2048"])
    assert rc == cli.EXIT_CAPPED
    with open(out_dir / "zz_sweep_d3_w1_independent_p0.0001_q0.0001.csv") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["capped"] == "1"


def test_cnot_channel_command(out_dir, capsys):
    rc = cli.main(["cnot-channel", "--d", "3", "--p", "0.015",
                   "--shots", "3000", "--seed", "2"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "I: " in out and "fit: p1=" in out
    payload = json.loads(
        (out_dir / "cnot_channel_d3_independent_p0.015_q0.015.json")
        .read_text())
    assert payload["shots"] == 3000
    assert set(payload["fit"]) >= {"p1", "p2", "p3", "chi_square_per_dof"}
    assert len(payload["symmetry_partners"]) == 10
    with open(out_dir / "cnot_channel_d3_independent_p0.015_q0.015.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 16
    assert sum(int(r["count"]) for r in rows) == 3000


def test_memory_correlation_command(out_dir, capsys):
    rc = cli.main(["memory-correlation", "--d", "3", "--p", "0.02",
                   "--model", "depolarizing", "--shots", "3000"])
    assert rc == cli.EXIT_OK
    assert "M=" in capsys.readouterr().out
    files = list(out_dir.iterdir())
    assert any(f.name.startswith("memory_correlation_d3_r3_depolarizing")
               for f in files)


def test_threshold_command(out_dir, capsys):
    rc = cli.main(["threshold", "--protocol", "memory", "--d-list", "3,5",
                   "--p", "0.03", "--p-grid", "0.02,0.03,0.04",
                   "--shots", "1500"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "threshold:" in out
    with open(out_dir / "threshold_memory_independent.csv") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 6  # 2 distances x 3 grid points


def test_decode_check_command(capsys, out_dir):
    rc = cli.main(["decode-check", "--protocol", "zz", "--d", "3",
                   "--p", "0.02", "--shots", "500"])
    assert rc == cli.EXIT_OK
    assert "homology_violations=0" in capsys.readouterr().out
