from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robtl.arith import Num  # noqa: E402
from robtl.expressions import (Always, AtomDX, AtomSX, Eventually, Max, Min, Sigma,  # noqa: E402
                               TimeInterval, Until, WeightedSum)
from robtl.logic import (And, Atomic, EventuallyF, GloballyF, Implies, Not, Or, TrueF,  # noqa: E402
                         UntilF)
from robtl.model import PenaltyFunction  # noqa: E402
from robtl.perturbation import NIL  # noqa: E402

COUNTER = """
var x : [0, 1000];
init { x = 0; }
kernel { x' = x + 1; }
penalty rho_x = x / 1000;
"""

NOISY = """
const drift = 0.1;
var x : [0, 1];
var mode : {low, high};
init { x = 0.5; mode = low; }
kernel {
    x' = min(1, max(0, x + uniform(-drift, drift)));
    mode' = if x > 0.5 then high else low;
}
effect bump { x' = min(1, x + 0.2); }
penalty rho_x = x;
penalty rho_mode = if mode == high then 1 else 0;
perturbation p_bump = (bump@0)^3;
"""


@pytest.fixture
def counter_doc():
    from robtl.dsl import parse_model
    return parse_model(COUNTER, "counter.robtl")


@pytest.fixture
def noisy_doc():
    from robtl.dsl import parse_model
    return parse_model(NOISY, "noisy.robtl")


def random_interval(rng: random.Random, h: int) -> TimeInterval:
    a = rng.randint(0, h)
    return TimeInterval(a, rng.randint(a, h))


def random_expr(rng: random.Random, atoms: list, h: int, depth: int = 3):
    """A random distance expression over a fixed pool of atoms."""
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(atoms)
    kind = rng.choice(["F", "G", "U", "min", "max", "sum", "sigma"])
    sub = lambda: random_expr(rng, atoms, h, depth - 1)  # noqa: E731
    if kind == "F":
        return Eventually(random_interval(rng, h), sub())
    if kind == "G":
        return Always(random_interval(rng, h), sub())
    if kind == "U":
        return Until(sub(), random_interval(rng, h), sub())
    if kind == "min":
        return Min(sub(), sub())
    if kind == "max":
        return Max(sub(), sub())
    if kind == "sum":
        w = rng.choice([0.25, 0.5, 0.75])
        return WeightedSum(((w, sub()), (1 - w, sub())))
    return Sigma(sub(), rng.choice(["<", "<=", ">=", ">"]), rng.choice([0.0, 0.25, 0.5, 1.0]))


def atom_pool(n: int = 3) -> list:
    out = []
    for i in range(n):
        rho = PenaltyFunction(f"r{i}", Num(0.0))
        out.append(AtomSX(rho) if i % 2 == 0 else AtomDX(rho))
    return out


def atomic_pool(n: int = 3) -> list:
    atoms = atom_pool(1)
    return [Atomic(atoms[0], NIL, "<=", (i + 1) / (n + 1)) for i in range(n)]


def random_formula(rng: random.Random, atomics: list, h: int, depth: int = 3):
    if depth == 0 or rng.random() < 0.2:
        return rng.choice(atomics + [TrueF()])
    kind = rng.choice(["not", "and", "or", "imp", "U", "F", "G"])
    sub = lambda: random_formula(rng, atomics, h, depth - 1)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind == "and":
        return And(sub(), sub())
    if kind == "or":
        return Or(sub(), sub())
    if kind == "imp":
        return Implies(sub(), sub())
    if kind == "U":
        return UntilF(sub(), random_interval(rng, h), sub())
    if kind == "F":
        return EventuallyF(random_interval(rng, h), sub())
    return GloballyF(random_interval(rng, h), sub())


GRID = [i / 8 for i in range(9)]


def atom_table(rng: random.Random, atoms: list, h: int) -> dict:
    """Atom values on a coarse grid so that ties are frequent."""
    return {(id(a), t): rng.choice(GRID) for a in atoms for t in range(h + 1)}
