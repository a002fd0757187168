import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from fdelab import cli
from fdelab.core import Trajectory
from fdelab.scenario import ScenarioError, load_scenario, with_override

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

DELAY_CHECK = """
[model]
id = "delay-G"
kappa = 1.0
tau = 0.25
G = { kind = "power", p = 1.0 }

[anchor]
t0 = 0.0
c = {c}

[check]
theorems = {theorems}
window = 40.0
"""


def write(tmp_path, text, name="scn.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def check_file(tmp_path, c=0.2, theorems='["T6.1"]'):
    return write(tmp_path, DELAY_CHECK.replace("{c}", repr(c)).replace("{theorems}", theorems))


def load_json(path):
    return json.loads(Path(path).read_text())


# -- check -------------------------------------------------------------------

def test_check_passes_with_interval(tmp_path):
    code = cli.main(["check", "--scenario", check_file(tmp_path), "--out-dir", str(tmp_path)])
    assert code == 0
    rep = load_json(tmp_path / "check.json")
    assert rep["passed"] is True
    (thm,) = rep["theorems"]
    assert thm["theorem"] == "T6.1"
    iv = thm["c_interval"]
    assert iv["lower"] == 0.0 and not iv["lower_closed"]
    assert iv["upper"] == pytest.approx(math.exp(-0.25), rel=1e-12) and iv["upper_closed"]
    assert thm["conditions"]


def test_check_anchor_outside_interval(tmp_path):
    code = cli.main(["check", "--scenario", check_file(tmp_path, c=0.9), "--out-dir", str(tmp_path)])
    assert code == 2
    thm = load_json(tmp_path / "check.json")["theorems"][0]
    assert thm["c_in_interval"] is False
    assert "outside the admissible interval" in thm["note"]


def test_check_empty_theorem_list(tmp_path):
    code = cli.main(["check", "--scenario", check_file(tmp_path, theorems="[]"), "--out-dir", str(tmp_path)])
    assert code == 0
    assert load_json(tmp_path / "check.json")["theorems"] == []


def test_check_theorem_model_mismatch(tmp_path, capsys):
    code = cli.main(["check", "--scenario", check_file(tmp_path, theorems='["T6.2"]'), "--out-dir", str(tmp_path)])
    assert code == 1
    assert "T6.2" in capsys.readouterr().err


# -- scenario errors ---------------------------------------------------------

def test_unknown_key_is_a_usage_error(tmp_path, capsys):
    text = DELAY_CHECK.replace("{c}", "0.2").replace("{theorems}", "[]").replace("tau = 0.25", "tau = 0.25\ntua = 1")
    assert cli.main(["check", "--scenario", write(tmp_path, text)]) == 1
    err = capsys.readouterr().err
    assert "model" in err and "tua" in err


def test_missing_file_and_bad_toml(tmp_path, capsys):
    assert cli.main(["check", "--scenario", str(tmp_path / "nope.toml")]) == 1
    assert cli.main(["check", "--scenario", write(tmp_path, "[model\n")]) == 1
    assert capsys.readouterr().err.count("fdelab:") == 2


def test_anchor_outside_band_is_rejected(tmp_path):
    assert cli.main(["check", "--scenario", check_file(tmp_path, c=1.5)]) == 1


def test_bad_overrides(tmp_path):
    path = check_file(tmp_path)
    assert cli.main(["check", "--scenario", path, "--window", "-1", "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["solve", "--scenario", path, "--step", "0", "--out-dir", str(tmp_path)]) == 1


def test_with_override():
    scn = load_scenario(SCENARIOS / "a1_delay_p1.toml")
    sub = with_override(scn, "model.tau", 0.1)
    assert sub.raw["model"]["tau"] == 0.1 and scn.raw["model"]["tau"] == 0.25
    with pytest.raises(ScenarioError):
        with_override(scn, "model.G", 1.0)
    with pytest.raises(ScenarioError):
        with_override(scn, "model.nope", 1.0)
    with pytest.raises(ScenarioError):
        with_override(scn, "model.tau", -1.0)


# -- solve and verify --------------------------------------------------------

def solve(tmp_path, name, *extra):
    return cli.main(["solve", "--scenario", str(SCENARIOS / name), "--out-dir", str(tmp_path), *extra])


def test_constant_scenario(tmp_path):
    assert solve(tmp_path, "constant_balance.toml") == 0
    traj = cli.read_trajectory(tmp_path / "trajectory.csv")
    assert np.max(np.abs(traj.u - 0.4)) <= 1e-12
    assert (tmp_path / "trajectory.csv").read_text().startswith("t,u,du\n")
    rep = load_json(tmp_path / "report.json")
    assert rep["status"] == "pass" and rep["failure"] is None
    assert rep["solve"]["converged"] and rep["solve"]["cauchy_trace"] == [0.0]


def test_solve_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert solve(a, "constant_balance.toml") == 0
    assert solve(b, "constant_balance.toml") == 0
    for name in ("trajectory.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_round_trip(tmp_path):
    assert solve(tmp_path, "constant_balance.toml") == 0
    assert cli.main(["verify", "--scenario", str(SCENARIOS / "constant_balance.toml"),
                     "--out-dir", str(tmp_path)]) == 0
    solved = load_json(tmp_path / "report.json")
    verified = load_json(tmp_path / "verify.json")
    assert verified["required"] == solved["required"]
    assert verified["properties"]["flags"] == solved["properties"]["flags"]


def test_verify_rejects_bad_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n0,0\n")
    assert cli.main(["verify", "--scenario", str(SCENARIOS / "constant_balance.toml"), "--out-dir", str(tmp_path),
                     "--trajectory", str(bad)]) == 1


def test_blow_up_is_a_solver_failure(tmp_path):
    assert solve(tmp_path, "blowup_linear.toml") == 3
    rep = load_json(tmp_path / "report.json")
    assert rep["status"] == "failed"
    assert rep["failure"]["stage"] == "extend"
    reach = rep["failure"]["reach"]
    assert 0.0 < reach < 2000.0
    traj = cli.read_trajectory(tmp_path / "trajectory.csv")
    assert traj.b == reach and np.all(np.isfinite(traj.u))


# -- output helpers ----------------------------------------------------------

def test_thinning_and_full_density(monkeypatch):
    t = np.linspace(0.0, 1.0, 1001)
    traj = Trajectory(t, t, np.ones_like(t))
    monkeypatch.setattr(cli, "MAX_ROWS", 100)
    thin = cli.trajectory_csv(traj).splitlines()
    assert thin[0] == "t,u,du" and len(thin) == 101
    assert thin[1].startswith("0,") and thin[-1].startswith("1,")
    assert len(cli.trajectory_csv(traj, full_density=True).splitlines()) == 1002


def test_csv_round_trip_is_exact():
    t = np.linspace(-1.0, 1.0, 37)
    traj = Trajectory(t, np.sin(t) / 3.0, np.cos(t) / 7.0)
    rows = list(csv.reader(cli.trajectory_csv(traj).splitlines()))
    back = np.array(rows[1:], dtype=float)
    assert np.array_equal(back[:, 1], traj.u) and np.array_equal(back[:, 2], traj.du)


def test_report_encodes_non_finite_numbers():
    text = cli.dumps_report({"a": math.inf, "b": [-math.inf, math.nan], "c": np.float64(0.5)})
    assert json.loads(text) == {"a": "inf", "b": ["-inf", "nan"], "c": 0.5}


# -- sweep -------------------------------------------------------------------

def sweep(tmp_path, *extra):
    return cli.main(["sweep", "--scenario", str(SCENARIOS / "constant_balance.toml"), "--out-dir", str(tmp_path),
                     "--param", "anchor.c", *extra])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_rows_in_order(tmp_path):
    assert sweep(tmp_path, "--values", "0.2", "0.6") == 0
    rows = read_rows(tmp_path / "sweep.csv")
    assert [r["value"] for r in rows] == ["0.2", "0.6"]
    assert all(r["solve"] == "pass" and r["check"] == "none" for r in rows)
    assert sorted(p.name for p in (tmp_path / "rows").iterdir()) == ["row-0000.json", "row-0001.json"]


def test_sweep_parallel_matches_serial(tmp_path):
    assert sweep(tmp_path / "s", "--values", "0.1", "0.5", "0.9") == 0
    assert sweep(tmp_path / "p", "--values", "0.1", "0.5", "0.9", "--jobs", "3") == 0
    assert (tmp_path / "s" / "sweep.csv").read_bytes() == (tmp_path / "p" / "sweep.csv").read_bytes()


def test_sweep_empty_list(tmp_path):
    assert sweep(tmp_path, "--values") == 0
    assert (tmp_path / "sweep.csv").read_text() == \
        "index,value,check,c_in_interval,solve,left_limit,left_status,right_end,error\n"


def test_sweep_row_errors_do_not_stop_the_sweep(tmp_path):
    assert sweep(tmp_path, "--values", "2.0", "0.3") == 3
    bad, good = read_rows(tmp_path / "sweep.csv")
    assert "anchor.c" in bad["error"] and bad["solve"] == ""
    assert good["solve"] == "pass" and good["error"] == ""


def test_sweep_needs_parameter(tmp_path):
    assert cli.main(["sweep", "--scenario", str(SCENARIOS / "constant_balance.toml"),
                     "--out-dir", str(tmp_path)]) == 1
