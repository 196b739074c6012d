from pathlib import Path

import pytest

from phasefem.cli import EXIT_CONFIG, EXIT_OK, OUTPUT_ENV, main

CONFIGS = Path(__file__).resolve().parents[1] / "benchmarks" / "configs"


def test_oracle_pc(capsys):
    assert main(["oracle", "pc", "--E", "210e9", "--nu", "0.3", "--gc", "2700", "--a0", "0.1"]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(8.91e7, rel=1e-3)


def test_oracle_pc_bad_value(capsys):
    assert main(["oracle", "pc", "--E", "210e9", "--nu", "0.3", "--gc", "-1", "--a0", "0.1"]) == EXIT_CONFIG


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert "missing.toml" in capsys.readouterr().err


def test_invalid_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('[scenario]\nkind = "heat"\n[materials.heat]\nrho = 1.0\nc_T = 1.0\nk0 = -1.0\n')
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "k0" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert main(["bogus"]) == EXIT_CONFIG
    assert main(["run"]) == EXIT_CONFIG
    assert main(["run", "x.toml", "--scheme", "wild"]) == EXIT_CONFIG


def test_verify_kernels(capsys):
    assert main(["verify", "kernels"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") > 20


def test_verify_oracles(capsys):
    assert main(["verify", "oracles"]) == EXIT_OK


def test_run_uses_output_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert main(["run", str(CONFIGS / "heat_bar.toml")]) == EXIT_OK
    assert (tmp_path / "heat_bar" / "manifest.json").exists()
    assert (tmp_path / "heat_bar" / "heat_probes.csv").exists()


def test_run_explicit_out_and_limit(tmp_path, capsys):
    assert main(["run", str(CONFIGS / "heat_bar.toml"), "--out", str(tmp_path / "x"), "--max-increments", "2"]) == EXIT_OK
    assert "stopped" in capsys.readouterr().out
