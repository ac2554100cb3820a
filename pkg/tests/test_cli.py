from __future__ import annotations

import json
import subprocess
import sys

import pytest

from saddlebench.cli import main
from saddlebench.game import gaussian_perturb, write_game
import numpy as np


def run(*args):
    return main(list(args))


def test_help_for_every_subcommand(capsys):
    for cmd in ("solve", "diagnose", "stability", "trials", "tails", "figure"):
        with pytest.raises(SystemExit) as info:
            run(cmd, "--help")
        assert info.value.code == 0
    capsys.readouterr()


def test_solve_ok(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert run("solve", "--illcond-gamma", "0.25", "--algo", "ogda", "--eps", "1e-6", "--out", str(out)) == 0
    captured = capsys.readouterr()
    assert "config:" in captured.err and '"eta": 0.125' in captured.err
    lines = out.read_text().splitlines()
    assert lines[0] == "iter,phi,dist_to_eq"
    assert float(lines[-1].split(",")[1]) <= 1e-6


def test_solve_missing_file(capsys):
    assert run("solve", "missing.json") == 1
    assert "missing.json" in capsys.readouterr().err


def test_solve_cap(capsys):
    assert run("solve", "--illcond-gamma", "0.25", "--algo", "ogda", "--max-iters", "3", "--eps", "1e-12") == 2


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        run("solve", "--bogus")
    assert info.value.code == 1


def test_solve_from_file_with_oracle(tmp_path, capsys):
    path = tmp_path / "g.json"
    write_game(gaussian_perturb(np.diag([0.25, 0.5, 1.0]), 0.1, 4), path)
    out = tmp_path / "t.csv"
    assert run("solve", str(path), "--algo", "egda", "--oracle", "--record-every", "500", "--out", str(out)) == 0
    assert out.read_text().splitlines()[1].split(",")[2] != ""


def test_diagnose_report_and_json(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run("diagnose", "--illcond-gamma", "0.25", "--out", str(out)) == 0
    text = capsys.readouterr().out
    fields = dict(line.split("=", 1) for line in text.strip().splitlines())
    assert float(fields["alpha_P"]) == pytest.approx(1 / 7)
    assert float(fields["gamma_P"]) == pytest.approx(0.686412, abs=1e-5)
    doc = json.loads(out.read_text())
    for k, v in fields.items():
        assert repr(doc[k]) == v


def test_diagnose_degenerate(capsys):
    assert run("diagnose", "--zero", "3", "3") == 3
    assert "tight_count_x" in capsys.readouterr().err


def test_stability(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run("stability", "--illcond-gamma", "0.25", "--directions", "4", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["delta_ub_beta"] is None
    assert doc["delta_ub_sigma"] == pytest.approx(0.646447, abs=1e-5)


def test_trials_rows(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert run("trials", "--base", "zero5", "--sigma", "0.5", "--trials", "100", "--out", str(out)) == 0
    assert len(out.read_text().splitlines()) == 101


def test_trials_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["trials", "--base", "illcond:0.25", "--sigma", "0.1", "--trials", "3", "--algo", "egda",
            "--eps", "1e-4", "--seed", "11"]
    assert run(*args, "--out", str(a)) == 0
    assert run(*args, "--out", str(b), "--jobs", "2") == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("SADDLEBENCH_SEED", "17")
    run("trials", "--base", "zero3", "--sigma", "0.5", "--trials", "1")
    assert '"seed": 17' in capsys.readouterr().err
    run("trials", "--base", "zero3", "--sigma", "0.5", "--trials", "1", "--seed", "3")
    assert '"seed": 3' in capsys.readouterr().err


def test_tails_exit_codes(capsys):
    assert run("tails", "--which", "beta", "--trials", "50") == 0
    # an eps so large that every trial is a tail event must fail the validator
    assert run("tails", "--which", "beta", "--n", "2", "--m", "2", "--sigma", "1",
               "--trials", "30", "--eps", "0.04") in (0, 4)


def test_tails_failure_exit(monkeypatch, capsys):
    from saddlebench import lab

    monkeypatch.setattr(lab, "tail_statistics",
                        lambda *a, **k: [{"beta": 0.0, "gamma": 0.0, "alpha": 0.0}] * 50)
    assert run("tails", "--which", "beta", "--trials", "50") == 4


def test_figure(tmp_path, capsys):
    assert run("figure", "--gamma", "0.25", "--seeds", "2", "--iters", "20", "--out-dir", str(tmp_path)) == 0
    assert (tmp_path / "figure_gamma0.25_sigma0.csv").exists()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "saddlebench.cli", "solve", "--matching-pennies"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "converged=true" in proc.stdout
