from __future__ import annotations

import csv
import json

import pytest

from conftest import NOISY
from robtl.cli import main, parse_range


@pytest.fixture
def model(tmp_path):
    p = tmp_path / "noisy.robtl"
    p.write_text(NOISY + """
formula always_true = true;
formula never = D[sx(rho_x), p_bump] > 1;
formula close = D[sx(rho_x), p_bump] <= 0.5;
""")
    return str(p)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_range():
    assert parse_range("3..7") == (3, 7)
    assert parse_range("4") == (4, 4)


def test_usage_errors(model, capsys):
    assert main([]) == 3
    assert main(["check", model]) == 3
    assert main(["check", "missing.robtl", "--formula", "x"]) == 3
    assert main(["distance", model, "--expr", "sx(rho_x)", "--perturb", "p_bump", "--window", "5..2"]) == 3
    assert main(["--version"]) == 0
    capsys.readouterr()


def test_parse_diagnostics_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.robtl"
    bad.write_text("var x : [0, 1];\ninit { x = 0; }\nkernel { x' = y; }\n")
    assert main(["simulate", str(bad), "--k", "2", "--seed", "0"]) == 3
    err = capsys.readouterr().err
    assert "bad.robtl:3:" in err and "resolution error" in err


def test_query_diagnostics_exit_3(model, capsys):
    assert main(["check", model, "--formula", "D[sx(rho_nope), nil] <= 0.1", "--seed", "1"]) == 3
    assert "rho_nope" in capsys.readouterr().err


def test_horizon_cap_accepted(model, capsys):
    code = main(["check", model, "--formula", "D[G[0,5] sx(rho_x), p_bump] <= 0.5", "--seed", "1", "--h", "3"])
    assert code in (0, 1, 2)
    capsys.readouterr()


def test_simulate_csv(model, tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["simulate", model, "--k", "3", "--N", "4", "--seed", "2", "--out", str(out)]) == 0
    r = rows(out)
    assert r[0] == ["time", "trajectory", "x", "mode"]
    assert len(r) == 1 + 4 * 4


def test_distance_csv(model, tmp_path):
    out, js = tmp_path / "d.csv", tmp_path / "d.json"
    argv = ["distance", model, "--expr", "sx(rho_x)", "--perturb", "p_bump", "--at", "2", "--window", "0..8",
            "--ci", "--seed", "3", "--N", "30", "--l", "2", "--out", str(out), "--json", str(js)]
    assert main(argv) == 0
    r = rows(out)
    assert r[0] == ["time", "value", "ci_lo", "ci_hi"]
    assert [int(x[0]) for x in r[1:]] == list(range(9))
    assert float(r[1][1]) == 0.0 and float(r[3][1]) > 0.0
    for _, v, lo, hi in r[1:]:
        assert float(lo) <= float(v) <= float(hi)
    report = json.loads(js.read_text())
    assert report["config"] == {"N": 30, "ell": 2, "m": 50, "level": 0.95, "seed": 3, "h": None}
    assert len(report["rows"]) == 9 and "timings" not in report


def test_distance_without_ci_leaves_bounds_empty(model, capsys):
    assert main(["distance", model, "--expr", "sx(rho_x)", "--perturb", "p_bump", "--window", "0..1",
                 "--seed", "3", "--N", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].endswith(",,")


def test_check_exit_codes(model, tmp_path, capsys):
    base = [model, "--seed", "4", "--N", "30", "--l", "2"]
    assert main(["check", *base, "--formula", "always_true"]) == 0
    assert main(["check", *base, "--formula", "never"]) == 1
    assert main(["check", *base, "--formula", "always_true", "--formula", "never"]) == 1
    capsys.readouterr()


def test_check_three_valued_unknown(model, tmp_path, capsys):
    # a threshold placed inside the interval gives the unknown verdict
    js = tmp_path / "r.json"
    main(["distance", model, "--expr", "sx(rho_x)", "--perturb", "p_bump", "--at", "1", "--window", "1..1", "--ci",
          "--seed", "4", "--N", "30", "--l", "2", "--json", str(js)])
    capsys.readouterr()
    row = json.loads(js.read_text())["rows"][0]
    eta = (row["ci_lo"] + row["ci_hi"]) / 2
    out = tmp_path / "v.csv"
    assert row["ci_lo"] < row["ci_hi"]
    code = main(["check", model, "--formula", f"D[sx(rho_x), p_bump] <= {eta!r}", "--at", "1", "--three-valued",
                 "--seed", "4", "--N", "30", "--l", "2", "--out", str(out)])
    assert code == 2
    r = rows(out)
    assert r[0] == ["formula", "time", "verdict", "omega", "omega_code"]
    assert r[1][3:] == ["⋓", "0"]


def test_sweep_rows(model, tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", model, "--expr", "G[0,3] sx(rho_x)", "--perturb", "p_bump", "--at", "0..5",
                 "--seed", "1", "--N", "20", "--l", "2", "--out", str(out)]) == 0
    r = rows(out)
    assert len(r) == 7 and [int(x[0]) for x in r[1:]] == list(range(6))


def test_replay(model, tmp_path, capsys):
    js = tmp_path / "c.json"
    assert main(["check", model, "--formula", "close", "--at", "0..3", "--three-valued", "--seed", "6",
                 "--N", "20", "--l", "2", "--json", str(js), "--timings"]) in (0, 1, 2)
    capsys.readouterr()
    assert "timings" in json.loads(js.read_text())
    assert main(["replay", str(js), "--jobs", "3"]) == 0
    report = json.loads(js.read_text())
    report["rows"][0]["verdict"] = not report["rows"][0]["verdict"]
    js.write_text(json.dumps(report))
    assert main(["replay", str(js)]) == 1
    assert "rows" in capsys.readouterr().err


def test_entropy_seed_printed(model, capsys, tmp_path):
    js = tmp_path / "r.json"
    assert main(["simulate", model, "--k", "1", "--N", "2", "--json", str(js)]) == 0
    err = capsys.readouterr().err
    seed = json.loads(js.read_text())["config"]["seed"]
    assert f"seed {seed}" in err


def test_bundled_model_name(capsys):
    assert main(["check", "engine", "--formula", "true", "--seed", "0", "--N", "2"]) == 0
    assert "true" in capsys.readouterr().out


def test_jobs_do_not_change_output(model, tmp_path, monkeypatch):
    outs = []
    for jobs in ("1", "5"):
        monkeypatch.setenv("ROBTL_JOBS", jobs)
        out = tmp_path / f"d{jobs}.csv"
        main(["distance", model, "--expr", "F[0,2] sx(rho_x)", "--perturb", "p_bump", "--window", "0..6",
              "--ci", "--seed", "9", "--N", "25", "--l", "3", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
