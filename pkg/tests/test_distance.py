from __future__ import annotations

import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robtl.arith import Num, Var
from robtl.distance import (ConfidenceInterval, Direction, bootstrap_ci, compute_wass, exact_oracle,
                            interval_from_replicates, wass_projections, z_quantile)
from robtl.model import PenaltyFunction

RHO = PenaltyFunction("x", Var("x", 0))
SX, DX = Direction.SX, Direction.DX


def col(values):
    return np.asarray(values, dtype=float)[:, None]


def test_identical_sets_are_at_distance_zero():
    X = col([0.1, 0.5, 0.9])
    assert compute_wass(X, X, SX, RHO, 0) == 0.0
    assert compute_wass(X, X, DX, RHO, 0) == 0.0


def test_hand_instance():
    omega, nu = col([0.1, 0.3]), col([0.0, 0.2, 0.4, 0.6])
    assert compute_wass(omega, nu, SX, RHO, 0) == pytest.approx(0.125, abs=1e-15)
    assert compute_wass(omega, nu, DX, RHO, 0) == pytest.approx(0.025, abs=1e-15)


def test_maximal_gap():
    assert compute_wass(col([0.0] * 4), col([1.0] * 4), SX, RHO, 0) == 1.0
    assert compute_wass(col([0.0] * 4), col([1.0] * 4), DX, RHO, 0) == 0.0


def test_size_mismatch_rejected():
    with pytest.raises(ValueError):
        compute_wass(col([0.1, 0.2]), col([0.1, 0.2, 0.3]), SX, RHO, 0)


def test_unsorted_input_is_sorted_first():
    assert wass_projections([0.3, 0.1], [0.6, 0.0, 0.4, 0.2], SX) == pytest.approx(0.125)


def test_oracle_shift():
    w = np.array([0.1, 0.2, 0.4])
    assert exact_oracle(w, w, SX) == 0.0
    assert exact_oracle(w, w + 0.25, SX) == pytest.approx(0.25)
    assert exact_oracle(w, w + 0.25, DX) == 0.0


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8).flatmap(
    lambda a: st.tuples(st.just(a), st.lists(st.floats(0, 1), min_size=len(a), max_size=len(a)))),
    st.sampled_from([SX, DX]))
def test_oracle_equivalence(pair, op):
    omega, nu = pair
    assert wass_projections(omega, nu, op) == pytest.approx(exact_oracle(omega, nu, op), abs=1e-12)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=20), st.integers(1, 4))
def test_nonnegative_and_zero_iff_equal(values, ell):
    omega = np.asarray(values)
    nu = np.repeat(omega, ell)
    assert wass_projections(omega, nu, SX) == 0.0
    assert wass_projections(omega, nu, DX) == 0.0
    moved = nu.copy()
    moved[0] += 0.125
    assert wass_projections(omega, moved, SX) + wass_projections(omega, moved, DX) > 0.0


@given(st.lists(st.floats(0, 0.5), min_size=2, max_size=30), st.floats(0.001, 0.5))
def test_shift_law(values, c):
    omega = np.asarray(values)
    before = wass_projections(omega, omega, SX)
    after = wass_projections(omega, omega + c, SX)
    assert after - before == pytest.approx(c, abs=1e-12)


def test_z_quantile():
    assert z_quantile(0.95) == pytest.approx(1.959963984540054, abs=1e-9)
    assert z_quantile(0.99) == pytest.approx(2.5758293035489, abs=1e-9)
    with pytest.raises(ValueError):
        z_quantile(1.0)


def test_bootstrap_constant_sets():
    X = col([0.4] * 10)
    ci = bootstrap_ci(X, np.repeat(X, 3, axis=0), SX, RHO, 0, m=20, rng=np.random.default_rng(0))
    assert (ci.lo, ci.hi, ci.mean, ci.se) == (0.0, 0.0, 0.0, 0.0)


def test_bootstrap_deterministic_and_ordered():
    rng = np.random.default_rng(1)
    X1, X2 = col(rng.uniform(0, 0.5, 50)), col(rng.uniform(0.1, 0.6, 100))
    a = bootstrap_ci(X1, X2, SX, RHO, 0, m=50, rng=np.random.default_rng(7))
    b = bootstrap_ci(X1, X2, SX, RHO, 0, m=50, rng=np.random.default_rng(7))
    assert a == b
    assert 0.0 <= a.lo <= a.mean <= a.hi <= 1.0
    assert a.m == 50 and a.level == 0.95


def test_bootstrap_arguments():
    X = col([0.1, 0.2])
    with pytest.raises(ValueError):
        bootstrap_ci(X, X, SX, RHO, 0, m=1, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        bootstrap_ci(X, X, SX, RHO, 0, m=10, level=1.5, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        bootstrap_ci(X, X, SX, RHO, 0)


def test_interval_formula():
    W = np.array([0.1, 0.2, 0.3])
    ci = interval_from_replicates(W, 0.95)
    assert ci.mean == pytest.approx(0.2)
    assert ci.se == pytest.approx(0.1)
    assert ci.lo == pytest.approx(0.2 - 1.959963984540054 * 0.1)
    clamped = interval_from_replicates(np.array([0.0, 0.0, 0.3]), 0.95)
    assert clamped.lo == 0.0


def test_coverage_on_known_shift():
    # nominal U[0, 0.5], perturbed shifted by 0.2: true SX distance 0.2
    hits = 0
    for rep in range(100):
        rng = np.random.default_rng(1000 + rep)
        base = rng.uniform(0, 0.5, 200)
        pert = rng.uniform(0, 0.5, 200) + 0.2
        ci = bootstrap_ci(col(base), col(pert), SX, RHO, 0, m=50, rng=rng)
        hits += 0.2 in ci
    assert hits >= 90


def test_point_interval():
    ci = ConfidenceInterval.point(0.3)
    assert ci.width == 0 and 0.3 in ci


def test_constant_penalty_gives_zero():
    rho = PenaltyFunction("c", Num(0.7))
    assert compute_wass(col([0.0, 1.0]), col([0.5, 0.2]), SX, rho, 3) == 0.0


def test_runtime_dominated_by_sort():
    rng = np.random.default_rng(0)
    omega, nu = rng.random(20000), rng.random(20000)
    t0 = time.perf_counter()
    wass_projections(omega, nu, SX)
    assert time.perf_counter() - t0 < 1.0
