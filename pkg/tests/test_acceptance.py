"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line to the terminal.
"""
from __future__ import annotations

import dataclasses
import random
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import atom_pool, atom_table, atomic_pool, random_expr, random_formula
from reference import ref_expr, ref_sat
from robtl import expressions as ex
from robtl import logic
from robtl.arith import Var
from robtl.checker import CheckConfig, Checker, nominal
from robtl.cli import main
from robtl.distance import ConfidenceInterval, Direction, compute_wass, exact_oracle
from robtl.dsl import parse_query
from robtl.engine import attack_presets, offset_variants
from robtl.logic import ThreeValued
from robtl.model import PenaltyFunction
from robtl.perturbation import IDENTITY, AtomicEffect, At, Iter, Seq, psem_at, schedule

RHO = PenaltyFunction("x", Var("x", 0))
SX, DX = Direction.SX, Direction.DX


@contextmanager
def criterion(n: int, pytestconfig, budget: float):
    """Print one PASS/FAIL line for criterion ``n`` and enforce its runtime budget."""
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget:.0f}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        with capman.global_and_fixture_disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s)")


def col(values):
    return np.asarray(values, dtype=float)[:, None]


def test_1_estimator_exactness(pytestconfig):
    with criterion(1, pytestconfig, 5.0):
        omega, nu = col([0.1, 0.3]), col([0.0, 0.2, 0.4, 0.6])
        assert abs(compute_wass(omega, nu, SX, RHO, 0) - 0.125) <= 1e-12
        assert abs(compute_wass(omega, nu, DX, RHO, 0) - 0.025) <= 1e-12
        rng = np.random.default_rng(1)
        for i in range(1000):
            n = int(rng.integers(1, 65))
            a, b = rng.random(n), rng.random(n)
            op = SX if i % 2 == 0 else DX
            assert abs(compute_wass(col(a), col(b), op, RHO, 0) - exact_oracle(a, b, op)) <= 1e-12


def test_2_shift_recovery(pytestconfig):
    with criterion(2, pytestconfig, 5.0):
        rng = np.random.default_rng(2)
        base = rng.uniform(0.0, 0.5, 10_000)
        est = compute_wass(col(base), col(base + 0.3), SX, RHO, 0)
        assert abs(est - 0.3) <= 0.01


def test_3_semantics_oracles(pytestconfig):
    with criterion(3, pytestconfig, 10.0):
        rng = random.Random(3)
        atoms = atom_pool(3)
        for _ in range(500):
            h = rng.randint(0, 10)
            e = random_expr(rng, atoms, h)
            table = atom_table(rng, atoms, h)
            tau = rng.randint(0, h)
            assert ex.evaluate(e, tau, lambda a, t: table[(id(a), t)], h) == ref_expr(e, tau, table, h)
        atomics = atomic_pool(3)
        for _ in range(500):
            h = rng.randint(0, 10)
            phi = random_formula(rng, atomics, h)
            verdicts = {(id(a), t): rng.random() < 0.5 for a in atomics for t in range(h + 1)}
            tau = rng.randint(0, h)
            got = logic.evaluate(phi, tau, lambda a, t: ThreeValued.lift(verdicts[(id(a), t)]), h)
            assert (got is ThreeValued.TRUE) == ref_sat(phi, tau, verdicts, h)


def test_4_perturbation_algebra(pytestconfig, noisy_doc):
    f = AtomicEffect("f")
    bump = noisy_doc.effects["bump"]
    with criterion(4, pytestconfig, 1.0):
        for tau0 in range(6):
            for n in range(6):
                window = list(range(tau0, tau0 + n))
                p = Seq(Iter(At(IDENTITY, 0), tau0), Iter(At(f, 0), n))
                assert [i for i, e in enumerate(schedule(p, 20)) if e == f] == window
                q = Seq(Iter(At(IDENTITY, 0), tau0), Iter(At(bump, 0), n))
                d = noisy_doc.init
                changed = [i for i in range(20) if psem_at(q, d, i, np.random.default_rng(i)) != d]
                assert changed == window


def test_5_engine_window(pytestconfig):
    with criterion(5, pytestconfig, 300.0):
        variants = offset_variants()
        expr = parse_query("sx(rho_temp)", variants[-1.5])
        cfg = CheckConfig(N=100, ell=10, m=50, seed=0)
        curves = {}
        for lo in (-2.0, -1.5, -1.0):
            doc = variants[lo]
            assert doc.constants["stressincr"] == 0.02
            E = nominal(doc.kernel, doc.init, 300, cfg)
            curves[lo] = Checker(E, cfg).series(expr, doc.perturbations["p_temp"], 0, range(90, 301), with_ci=True)
        peak_t, _, _ = max(curves[-1.5], key=lambda row: row[1])
        assert 100 <= peak_t <= 200
        at_peak = {lo: next(ci for t, _, ci in rows if t == peak_t) for lo, rows in curves.items()}
        assert at_peak[-2.0].lo > at_peak[-1.0].hi


def test_6_ci_width_order(pytestconfig):
    with criterion(6, pytestconfig, 600.0):
        presets = attack_presets()
        doc = presets.document
        expr = doc.expressions["exp_wrn"]
        pert = presets.perturbations["p_temp"]
        widths = {}
        for m in (50, 100):
            cfg = CheckConfig(N=100, ell=10, m=m, level=0.95, seed=0)
            chk = Checker(nominal(doc.kernel, doc.init, 50 + 210, cfg), cfg)
            widths[m] = statistics.fmean(chk.distance_ci(expr, pert, t)[1].width for t in range(51))
        assert all(1e-4 <= w <= 5e-2 for w in widths.values()), widths
        assert max(widths.values()) / min(widths.values()) <= 2.0, widths


def test_7_threshold_monotonicity(pytestconfig):
    with criterion(7, pytestconfig, 600.0):
        doc = attack_presets().document
        base = doc.formulas["phi_eta3"]
        phis = [dataclasses.replace(base, eta=eta) for eta in (0.03, 0.04, 0.06)]
        cfg = CheckConfig(N=100, ell=10, m=50, seed=0)
        E = nominal(doc.kernel, doc.init, 50 + 210, cfg)
        chk = Checker(E, cfg)
        for t in range(51):
            verdicts = [chk.omega(phi, t) for phi in phis]
            assert verdicts == sorted(verdicts), (t, verdicts)
        point = Checker(E, cfg, interval_hook=lambda a, t, v: ConfidenceInterval.point(v, cfg.level, cfg.m))
        for phi in phis:
            for t in range(0, 51, 5):
                assert point.omega(phi, t) is ThreeValued.lift(point.eval_bool(phi, t))


def test_8_complexity(pytestconfig):
    def timed(a, b):
        runs = []
        for _ in range(5):
            start = time.perf_counter()
            compute_wass(a, b, SX, RHO, 0)
            runs.append(time.perf_counter() - start)
        return statistics.median(runs)

    with criterion(8, pytestconfig, 60.0):
        rng = np.random.default_rng(8)
        ell = 10
        sizes = [10_000, 20_000, 40_000, 80_000]
        times = []
        for total in sizes:
            a, b = col(rng.random(total // ell)), col(rng.random(total))
            timed(a, b)
            times.append(timed(a, b))
        ratios = [y / x for x, y in zip(times, times[1:])]
        assert all(r < 2.5 for r in ratios), ratios


CLI_RUNS = {
    "check": ["check", "engine", "--formula", "phi3", "--formula", "phi_eta3", "--at", "0..1",
              "--three-valued", "--N", "30", "--l", "3", "--m", "20", "--seed", "9"],
    "distance": ["distance", "engine", "--expr", "sx(rho_temp)", "--perturb", "p_temp_at", "--at", "10",
                 "--window", "5..40", "--ci", "--N", "30", "--l", "3", "--seed", "9"],
    "sweep": ["sweep", "engine", "--expr", "G[0,20] sx(rho_heat)", "--perturb", "p_cool", "--at", "0..6",
              "--ci", "--N", "30", "--l", "3", "--seed", "9"],
}


def test_9_reproducibility(pytestconfig, tmp_path):
    with criterion(9, pytestconfig, 120.0):
        for name, argv in CLI_RUNS.items():
            outputs = []
            for jobs in ("1", "8"):
                csv_path, json_path = tmp_path / f"{name}-{jobs}.csv", tmp_path / f"{name}-{jobs}.json"
                status = main([*argv, "--jobs", jobs, "--out", str(csv_path), "--json", str(json_path)])
                assert status in (0, 1, 2)
                outputs.append((csv_path.read_bytes(), json_path.read_bytes()))
            assert outputs[0] == outputs[1], name
