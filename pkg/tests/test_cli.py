"""CLI surface: subcommands, config precedence, determinism, exit codes."""

import json
import math

import pytest

from bandsphere.cli import main


def run_cli(argv):
    return main(argv)


def test_covariance_csv_output(tmp_path):
    out = tmp_path / "prof.csv"
    rc = run_cli(["covariance", "--n", "200", "--beta", "0.5", "--points", "500", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    header_comments = [l for l in lines if l.startswith("#")]
    assert any("seed = " in l for l in header_comments)
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "psi,theta,exact,cd,hilb,lemma1_r1,lemma1_r2"
    rows = body[1:]
    assert len(rows) == 500
    first = rows[0].split(",")
    assert float(first[0]) == 0.0
    assert float(first[2]) == pytest.approx(1.0, abs=1e-12)  # exact column starts at 1
    # exact and cd columns identical after rounding at 1e-10
    for row in rows[:: 50]:
        cols = row.split(",")
        assert round(float(cols[2]), 10) == round(float(cols[3]), 10)


def test_covariance_epsilon_validation():
    assert run_cli(["covariance", "--n", "50", "--beta", "0.5", "--epsilon", str(math.pi)]) == 2
    assert run_cli(["covariance", "--beta", "0.5"]) == 2


def test_simulate_dump(tmp_path):
    out = tmp_path / "field.csv"
    rc = run_cli(["simulate", "--n", "12", "--beta", "0.5", "--seed", "3", "--out", str(out)])
    assert rc == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "theta_index,phi_index,value"
    i, j, v = lines[1].split(",")
    assert (i, j) == ("0", "0")
    float(v)


def test_excursion_direct_mode_flag_and_exit(tmp_path):
    out = tmp_path / "exc.json"
    rc = run_cli([
        "excursion", "--mode", "h2-direct", "--n", "100", "--beta", "0.5",
        "--replicates", "20000", "--seed", "42", "--out", str(out),
    ])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["flags"]["var_h2_ok"] is True
    assert payload["pass"] is True
    assert payload["config"]["master_seed"] == 42
    assert payload["config"]["mode"] == "h2_direct"
    row = payload["rows"][0]
    assert row["dof"] == 1176
    assert abs(row["var_h2_hat"] - row["var_h2_exact_formula"]) <= 3 * row["var_h2_se"]


def test_clt_byte_identical_reruns(tmp_path):
    args = [
        "clt", "--n", "24", "--beta", "0.5", "--u", "1.0",
        "--replicates", "600", "--seed", "42",
    ]
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    rc1 = run_cli(args + ["--out", str(out1)])
    rc2 = run_cli(args + ["--out", str(out2)])
    assert rc1 == rc2
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert "ks_critical" in payload
    assert payload["rows"][0]["clt_ks_stat"] is not None


def test_scaling_report_structure(tmp_path):
    out = tmp_path / "scaling.json"
    rc = run_cli([
        "scaling", "--n", "16,24,32", "--beta", "0.5", "--replicates", "150",
        "--seed", "11", "--out", str(out),
    ])
    assert rc in (0, 1)  # slope band is not claimed at these tiny n
    payload = json.loads(out.read_text())
    assert payload["slope_target"] == -1.5
    assert payload["fitted_exponent"] is not None
    assert len(payload["rows"]) == 3
    assert payload["exponent_ci"] is not None


def test_chaos_report_structure(tmp_path):
    out = tmp_path / "chaos.json"
    rc = run_cli([
        "chaos", "--n", "16,32", "--beta", "0.5", "--replicates", "300",
        "--seed", "17", "--out", str(out),
    ])
    assert rc in (0, 1)
    payload = json.loads(out.read_text())
    assert set(payload["q3_scaled"]) == {"16", "32"}
    assert set(payload["flags"]) == {"h2_identity_ok", "q3_band_ok", "q4_band_ok", "h3_h2_decay_ok"}


def test_config_file_and_flag_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 100\nbeta = 0.5\nreplicates = 20000\nmode = h2_direct\nseed = 7\n")
    out1 = tmp_path / "one.json"
    rc = run_cli(["excursion", "--config", str(cfg), "--out", str(out1)])
    assert rc == 0
    payload = json.loads(out1.read_text())
    assert payload["config"]["replicates"] == 20000
    assert payload["config"]["master_seed"] == 7
    # a flag overrides the file value
    out2 = tmp_path / "two.json"
    rc = run_cli(["excursion", "--config", str(cfg), "--seed", "8", "--out", str(out2)])
    assert rc == 0
    assert json.loads(out2.read_text())["config"]["master_seed"] == 8


def test_seed_env_var_default(tmp_path, monkeypatch):
    monkeypatch.setenv("BANDSPHERE_SEED", "31415")
    out = tmp_path / "env.json"
    rc = run_cli([
        "excursion", "--mode", "h2-direct", "--n", "50", "--beta", "0.5",
        "--replicates", "5000", "--out", str(out),
    ])
    assert rc == 0
    assert json.loads(out.read_text())["config"]["master_seed"] == 31415


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense_key = 3\n")
    assert run_cli(["excursion", "--config", str(cfg)]) == 2


def test_excursion_replicate_csv_format(tmp_path):
    out = tmp_path / "reps.csv"
    rc = run_cli([
        "excursion", "--n", "16", "--beta", "0.5", "--replicates", "120",
        "--seed", "5", "--format", "csv", "--out", str(out),
    ])
    assert rc in (0, 1)
    lines = out.read_text().splitlines()
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "replicate,seed,u,area,h1,h2_quad,h2_exact,h3,h4"
    assert len(body) == 1 + 120


def test_worker_flag_does_not_change_output(tmp_path):
    base = ["excursion", "--n", "16", "--beta", "0.5", "--replicates", "150", "--seed", "5"]
    out1, out2 = tmp_path / "w1.json", tmp_path / "w2.json"
    run_cli(base + ["--workers", "1", "--out", str(out1)])
    run_cli(base + ["--workers", "2", "--out", str(out2)])
    a = json.loads(out1.read_text())
    b = json.loads(out2.read_text())
    assert a["rows"] == b["rows"]


def test_help_lists_defaults(capsys):
    for cmd in ("covariance", "simulate", "excursion", "scaling", "clt", "chaos"):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        assert "default" in text
