from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robtl.arith import Binary, Num, Var
from robtl.dsl import parse_model
from robtl.engine import build_engine_model
from robtl.model import (ArityError, DataSpace, DataState, FiniteDomain, IntervalDomain,
                         PenaltyFunction, VariableSpec, eval_penalty, validate_state)


_ENGINE = build_engine_model()


@pytest.fixture(scope="module")
def engine():
    return _ENGINE


def test_interval_member_ok(engine):
    d = engine.init
    assert validate_state(engine.space, d) == []
    assert d.get(engine.space, "temp") == 95.0


def test_stress_out_of_range_reported(engine):
    values = list(engine.init.values)
    values[engine.space.index("stress")] = 1.2
    assert validate_state(engine.space, values) == ["stress"]


def test_level_encoding_table():
    speed = FiniteDomain(("slow", "half", "full"))
    assert [speed.code(x) for x in speed.levels] == [0.0, 1.0, 2.0]
    space = DataSpace((VariableSpec("speed", speed),))
    assert validate_state(space, space.state({"speed": "half"})) == []
    assert space.state({"speed": "half"}).values == (1.0,)


def test_arity_error_is_distinct(engine):
    with pytest.raises(ArityError):
        validate_state(engine.space, (1.0, 2.0))


def test_bad_domains_rejected():
    with pytest.raises(ValueError):
        FiniteDomain(())
    with pytest.raises(ValueError):
        FiniteDomain(("a", "a"))
    with pytest.raises(ValueError):
        IntervalDomain(2.0, 1.0)
    with pytest.raises(ValueError):
        DataSpace((VariableSpec("x", IntervalDomain(0, 1)), VariableSpec("x", IntervalDomain(0, 1))))


@given(st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(min_value=0, max_value=n - 1))))
def test_level_roundtrip(arg):
    n, k = arg
    dom = FiniteDomain(tuple(f"l{i}" for i in range(n)))
    assert dom.code(dom.level(float(k))) == k
    assert dom.level(dom.code(f"l{k}")) == f"l{k}"


def _with(engine, **values):
    desc = engine.init.describe(engine.space)
    desc.update(values)
    return engine.space.state(desc)


def test_stress_penalty(engine):
    d = _with(engine, stress=0.3)
    assert eval_penalty(engine.penalties["rho_stress"], 0, d) == pytest.approx(0.3)


def test_temp_penalty(engine):
    d = _with(engine, ch_temp=100.0, temp=70.0)
    assert eval_penalty(engine.penalties["rho_temp"], 0, d) == pytest.approx(0.2)


def test_wrn_penalty_ok_is_zero(engine):
    assert eval_penalty(engine.penalties["rho_wrn"], 0, _with(engine, ch_wrn="ok")) == 0.0
    assert eval_penalty(engine.penalties["rho_wrn"], 0, _with(engine, ch_wrn="hot")) == 1.0


def test_penalty_clamped_and_counted():
    space = DataSpace((VariableSpec("x", IntervalDomain(-5, 5)),))
    rho = PenaltyFunction("twice", Binary("*", Num(2.0), Var("x", 0)))
    assert eval_penalty(rho, 0, DataState((3.0,))) == 1.0
    assert eval_penalty(rho, 0, DataState((-1.0,))) == 0.0
    assert eval_penalty(rho, 0, DataState((0.25,))) == 0.5
    assert rho.stats.evaluations == 3 and rho.stats.clamped == 2
    assert validate_state(space, DataState((0.25,))) == []


def test_time_dependent_penalty():
    doc = parse_model("var x : [0, 1];\ninit { x = 0; }\nkernel { }\npenalty r = time / 10;\n")
    assert eval_penalty(doc.penalties["r"], 3, doc.init) == pytest.approx(0.3)
    assert eval_penalty(doc.penalties["r"], 30, doc.init) == 1.0


@given(st.floats(min_value=0, max_value=150), st.floats(min_value=0, max_value=150),
       st.floats(min_value=0, max_value=1), st.integers(min_value=0, max_value=500))
def test_penalties_bounded_and_pure(temp, ch_temp, stress, tau):
    doc = _ENGINE
    d = _with(doc, temp=temp, ch_temp=ch_temp, stress=stress)
    for rho in doc.penalties.values():
        v = eval_penalty(rho, tau, d)
        assert 0.0 <= v <= 1.0
        assert math.isclose(v, eval_penalty(rho, tau, d), rel_tol=0, abs_tol=0)



def test_project_is_vectorized(engine):
    X = np.tile(engine.init.as_array(), (4, 1))
    X[:, engine.space.index("stress")] = [0.0, 0.25, 0.5, 1.0]
    assert engine.penalties["rho_stress"].project(X, 0).tolist() == [0.0, 0.25, 0.5, 1.0]
