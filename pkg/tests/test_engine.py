from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

from robtl.checker import CheckConfig, Checker, nominal, required_horizon
from robtl.cli import main
from robtl.dsl import parse_query
from robtl.engine import OFFSET_PRESETS, attack_presets, build_engine_model, offset_variants
from robtl.perturbation import schedule
from robtl.rng import stream
from robtl.sim import sim_step, simulate

GOLDEN = Path(__file__).parent / "golden"
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))


@pytest.fixture(scope="module")
def doc():
    return attack_presets().document


@pytest.fixture(scope="module")
def run(doc):
    return simulate(doc.kernel, doc.init, 50, 300, seed=0)


def state(doc, **values):
    desc = doc.init.describe(doc.space)
    desc.update(values)
    return doc.space.state(desc)


def test_constants(doc):
    c = doc.constants
    assert (c["cool_threshold"], c["ids_threshold"], c["stress_threshold"], c["stressincr"]) == (99.8, 101, 100, 0.02)


def test_initial_state(doc):
    d = doc.init.describe(doc.space)
    assert d["temp"] == d["ch_temp"] == 95.0
    assert all(d[f"p{k}"] == 95.0 for k in range(1, 7))
    assert (d["speed"], d["cool"], d["ch_wrn"], d["pc"], d["ch_in"]) == ("half", "off", "ok", "ctrl", "half")


def test_nominal_cooling_lasts_five_steps(doc, run):
    cool = run.sets[0].states[:, doc.space.index("cool")]
    series = np.stack([s.states[:, doc.space.index("cool")] for s in run.sets], axis=1)
    on = doc.space["cool"].domain.code("on")
    assert cool.tolist() == [doc.space["cool"].domain.code("off")] * 50
    for traj in series:
        runs, length = [], 0
        for v in traj:
            if v == on:
                length += 1
            elif length:
                runs.append(length)
                length = 0
        assert runs and set(runs) == {5}


def test_nominal_invariants(doc, run):
    temp = np.stack([s.states[:, doc.space.index("temp")] for s in run.sets])
    stress = np.stack([s.states[:, doc.space.index("stress")] for s in run.sets])
    assert ((temp >= 0) & (temp <= 150)).all()
    assert (np.diff(stress, axis=0) >= 0).all()


def test_shift_register(doc):
    d = state(doc, temp=97.0, p1=96.0, p2=95.5, p5=94.0)
    nxt = sim_step(doc.kernel, d, stream(0)).describe(doc.space)
    assert (nxt["p1"], nxt["p2"], nxt["p3"], nxt["p6"]) == (97.0, 96.0, 95.5, 94.0)


def test_stress_saturates(doc):
    hot = dict(p1=100.0, p2=100.5, p3=101.0, p4=100.0)
    assert sim_step(doc.kernel, state(doc, stress=0.5, **hot), stream(0)).describe(doc.space)["stress"] == pytest.approx(0.52)
    assert sim_step(doc.kernel, state(doc, stress=0.99, **hot), stream(0)).describe(doc.space)["stress"] == 1.0
    three = dict(p1=100.0, p2=100.5, p3=101.0)
    assert sim_step(doc.kernel, state(doc, stress=0.5, **three), stream(0)).describe(doc.space)["stress"] == 0.5


def test_ids_raises_warning(doc):
    nxt = sim_step(doc.kernel, state(doc, temp=101.5, cool="off"), stream(0)).describe(doc.space)
    assert (nxt["ch_wrn"], nxt["ch_speed"], nxt["ch_out"]) == ("hot", "slow", "full")
    nxt = sim_step(doc.kernel, state(doc, temp=101.5, cool="on"), stream(0)).describe(doc.space)
    assert nxt["ch_wrn"] == "ok"


def test_controller_starts_cooling(doc):
    nxt = sim_step(doc.kernel, state(doc, ch_temp=99.9, temp=99.9), stream(0)).describe(doc.space)
    assert (nxt["cool"], nxt["pc"]) == ("on", "c1")


def test_attack_window(doc):
    p = doc.perturbations["p_temp"]
    f = doc.effects["f_temp"]
    fired = [i for i, e in enumerate(schedule(p, 300)) if e == f]
    assert fired == list(range(100, 200))


def test_presets():
    presets = attack_presets()
    assert {"p_temp", "p_cool", "p_temp_at"} <= set(presets.perturbations)
    assert {"phi1", "phi2", "phi3", "phi_eta3"} <= set(presets.formulas)
    variants = offset_variants()
    assert sorted(variants) == sorted(OFFSET_PRESETS)
    assert variants[-2.0].constants["l_o"] == -2.0
    assert build_engine_model({"stressincr": 0.05}).constants["stressincr"] == 0.05


def test_phi1_horizon(doc):
    from robtl.logic import horizon
    assert horizon(doc.formulas["phi1"]) == 260


def test_calibrated_thresholds_hold_at_zero(doc):
    cfg = CheckConfig(seed=0)
    phi = doc.formulas["phi1_pre"]
    E = nominal(doc.kernel, doc.init, required_horizon(phi, cfg), cfg)
    assert Checker(E, cfg).eval_bool(phi, 0)


@pytest.mark.slow
def test_phi1_successful_attack_at_reachable_danger_threshold():
    # the window stress distance of this model stays near 0.29 at l_o = -1.5,
    # so the danger threshold is set below it
    doc = attack_presets({"eta4": 0.25}).document
    cfg = CheckConfig(seed=0)
    phi = doc.formulas["phi1"]
    E = nominal(doc.kernel, doc.init, required_horizon(phi, cfg), cfg)
    assert Checker(E, cfg).eval_bool(phi)


@pytest.mark.slow
def test_phi1_stealth_fails_at_low_threshold():
    doc = attack_presets({"eta3": 0.03}).document
    cfg = CheckConfig(seed=0)
    phi = doc.formulas["phi_eta3"]
    E = nominal(doc.kernel, doc.init, 50 + 210, cfg)
    chk = Checker(E, cfg)
    verdicts = [chk.eval_bool(phi, t) for t in range(0, 51, 5)]
    assert sum(verdicts) < len(verdicts) / 2


@pytest.mark.parametrize("name", ["engine_simulate.csv", "engine_distance.csv", "engine_sweep.csv"])
def test_golden(name, tmp_path):
    from regen_golden import RUNS
    out = tmp_path / name
    assert main([*RUNS[name], "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / name).read_bytes()


def test_cli_distance_example(tmp_path):
    out = tmp_path / "d.csv"
    argv = ["distance", "engine", "--expr", "sx(rho_temp)", "--perturb", "p_temp_at", "--at", "100",
            "--window", "90..300", "--ci", "--seed", "7", "--N", "100", "--l", "10", "--out", str(out)]
    assert main(argv) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    peak = max(rows, key=lambda r: float(r[1]))
    assert 100 <= int(peak[0]) <= 200
