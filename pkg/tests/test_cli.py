import csv
import json
import subprocess
import sys

import pytest

from loglab.cli import main
from loglab.sweep import CSV_COLUMNS


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_solve_constant(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "constant"\nc = 1.0\n[mu]\nvalue = 1.0\n[grid]\nn = 129\n')
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "theta.csv")))
    assert list(rows[0]) == ["x", "theta", "theta_prime", "theta_mu"]
    assert all(float(r["theta"]) == 1.0 for r in rows)
    meta = json.loads((out / "solve.meta.json").read_text())
    assert meta["command"] == "solve" and "finished" in meta


def test_solve_cosine_summary(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "cosine_offset"\nc = 1.0\nA = 1.0\n[mu]\nvalue = 1.0\n')
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out), "--n", "257"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert 0 < summary["S"] < summary["M"] < 2
    assert summary["n"] == 257 and summary["bounds"]["status"] == "pass"


def test_negative_mu_is_config_error(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "constant"\nc = 1.0\n[mu]\nvalue = -1.0\n')
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 3
    assert not out.exists()


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["frobnicate"],
    ["solve", "--config", "missing.toml"],
    ["hunt", "--n", "100"],
])
def test_bad_invocations_exit_3(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path / "o")] if argv[0] != "frobnicate" else argv) == 3
    assert not (tmp_path / "o").exists()


def test_solve_needs_single_mu(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "linear"\n')
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 3


def test_solver_failure_exit_2(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "constant"\nc = -1.0\n')
    assert main(["asymptotics", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_sweep_outputs_are_deterministic(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "sine_offset"\nc = 1.5\nA = 0.4\n'
                           '[mu]\nmin = 0.1\nmax = 10.0\ncount = 4\n[grid]\nn = 257\n')
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    header = (a / "sweep.csv").read_text().splitlines()[0]
    assert tuple(header.split(",")) == CSV_COLUMNS
    assert (a / "plot_sweep.py").exists()


def test_sweep_extra_moment(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "linear"\n[mu]\nvalues = [0.5, 1.0]\n'
                           '[options]\nmoment_p = 5\n[grid]\nn = 129\n')
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "moments_p5.csv").exists()


def test_verify_and_asymptotics(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "cosine_offset"\nc = 1.0\nA = 3.0\n'
                           '[mu]\nmin = 0.1\nmax = 10.0\ncount = 5\n[grid]\nn = 257\n')
    out = tmp_path / "o"
    assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "verify.json").read_text())
    assert report["verdicts"]["heni-min-decreasing"]["status"] == "pass"
    assert main(["asymptotics", "--config", cfg, "--out", str(out)]) == 0
    data = json.loads((out / "asymptotics.json").read_text())
    assert data["min_c_plus_rho"] > 0 and 1.8 <= data["remainder_slope"] <= 2.2
    header = (out / "rho.csv").read_text().splitlines()[0]
    assert header == "x,rho_m,c_plus_rho"


def test_verify_failure_exit_1(tmp_path, monkeypatch):
    from loglab import cli
    from loglab.verify import Verdict

    real = cli.run_verification

    def broken(*args, **kw):
        report = real(*args, **kw)
        report.verdicts["thm-1.2-M"] = Verdict("thm-1.2-M", "fail", {"monotone_slack": 0.0})
        return report

    monkeypatch.setattr(cli, "run_verification", broken)
    cfg = _write(tmp_path, '[resource]\npreset = "linear"\n[mu]\nvalues = [0.5, 1.0]\n[grid]\nn = 129\n')
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert (tmp_path / "o" / "verify.json").exists()


def test_hunt_defaults(tmp_path):
    out = tmp_path / "o"
    assert main(["hunt", "--out", str(out), "--n", "257", "--seedless"]) == 0
    result = json.loads((out / "hunt.json").read_text())
    assert result["found"] and result["params"]["A"] > result["closed_form_threshold"]


def test_hunt_unreachable(tmp_path):
    cfg = _write(tmp_path, '[hunt]\nfamily = "cosine"\nlo = 0.0\nhi = 1.5\nbudget = 4\n')
    assert main(["hunt", "--config", cfg, "--out", str(tmp_path / "o"), "--n", "129"]) == 0
    assert json.loads((tmp_path / "o" / "hunt.json").read_text())["found"] is False


def test_json_writes_nan_as_null(tmp_path):
    cfg = _write(tmp_path, '[resource]\npreset = "constant"\nc = 1.0\n[grid]\nn = 129\n')
    assert main(["asymptotics", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "asymptotics.json").read_text())["remainder_slope"] is None


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "loglab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "loglab" in proc.stdout
