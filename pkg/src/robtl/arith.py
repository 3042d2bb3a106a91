"""Arithmetic/boolean expressions over data states, compiled to vectorized closures.

Every compiled closure maps a :class:`Frame` holding a batch of states
(``rows x vars``) to an array with one value per row. Booleans are encoded as
floats 0.0/1.0, and NaN marks an undefined value (division by zero, square
root of a negative number). NaN propagates so the caller can report the
offending rule only for rows where the value is actually used.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable, Iterator, Optional

import numpy as np

from .diagnostics import Span


@dataclass(frozen=True)
class ArithExpr:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> Iterator["ArithExpr"]:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, ArithExpr):
                yield v
            elif isinstance(v, tuple):
                yield from (x for x in v if isinstance(x, ArithExpr))


@dataclass(frozen=True)
class Num(ArithExpr):
    value: float


@dataclass(frozen=True)
class BoolLit(ArithExpr):
    value: bool


@dataclass(frozen=True)
class Const(ArithExpr):
    name: str
    value: float


@dataclass(frozen=True)
class Var(ArithExpr):
    name: str
    index: int


@dataclass(frozen=True)
class Local(ArithExpr):
    name: str
    index: int


@dataclass(frozen=True)
class Level(ArithExpr):
    name: str
    code: float


@dataclass(frozen=True)
class Time(ArithExpr):
    pass


@dataclass(frozen=True)
class Unary(ArithExpr):
    op: str  # '-' or '!'
    arg: ArithExpr


@dataclass(frozen=True)
class Binary(ArithExpr):
    op: str
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True)
class Call(ArithExpr):
    fn: str
    args: tuple[ArithExpr, ...]


@dataclass(frozen=True)
class Uniform(ArithExpr):
    lo: ArithExpr
    hi: ArithExpr
    site: int


@dataclass(frozen=True)
class Cond(ArithExpr):
    cond: ArithExpr
    then: ArithExpr
    other: ArithExpr


@dataclass(frozen=True)
class Remap(ArithExpr):
    """Translate level codes of one enumeration into another (by level name); -1 if absent."""

    arg: ArithExpr
    table: tuple[float, ...]


ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("&", "|")
FUNCTIONS = {"abs": 1, "floor": 1, "sqrt": 1, "min": -2, "max": -2, "count": -1}


def walk(node: ArithExpr) -> Iterator[ArithExpr]:
    yield node
    for c in node.children():
        yield from walk(c)


def is_constant(node: ArithExpr) -> bool:
    return not any(isinstance(n, (Var, Local, Time, Uniform)) for n in walk(node))


def random_sites(node: ArithExpr) -> int:
    return max((n.site + 1 for n in walk(node) if isinstance(n, Uniform)), default=0)


class Frame:
    """Evaluation context: state batch, time step, uniform draws, let-bound locals."""

    __slots__ = ("X", "t", "U", "L")

    def __init__(self, X: np.ndarray, t: int, U: Optional[np.ndarray] = None,
                 L: Optional[list] = None):
        self.X = X
        self.t = t
        self.U = U
        self.L = L if L is not None else []


Compiled = Callable[[Frame], np.ndarray]

_CMP = {"==": np.equal, "!=": np.not_equal, "<": np.less, "<=": np.less_equal,
        ">": np.greater, ">=": np.greater_equal}


def _undefined_to_nan(values, *operands):
    bad = np.isnan(operands[0])
    for o in operands[1:]:
        bad = bad | np.isnan(o)
    return np.where(bad, np.nan, values)


def compile_arith(node: ArithExpr) -> Compiled:
    """Compile a resolved expression to a closure over :class:`Frame`."""
    if isinstance(node, (Num, Const)):
        v = float(node.value)
        return lambda fr: v
    if isinstance(node, BoolLit):
        v = 1.0 if node.value else 0.0
        return lambda fr: v
    if isinstance(node, Level):
        v = float(node.code)
        return lambda fr: v
    if isinstance(node, Var):
        j = node.index
        return lambda fr: fr.X[:, j]
    if isinstance(node, Local):
        j = node.index
        return lambda fr: fr.L[j]
    if isinstance(node, Time):
        return lambda fr: float(fr.t)
    if isinstance(node, Unary):
        a = compile_arith(node.arg)
        if node.op == "-":
            return lambda fr: -a(fr)
        return lambda fr: 1.0 - a(fr)
    if isinstance(node, Binary):
        return _compile_binary(node)
    if isinstance(node, Call):
        return _compile_call(node)
    if isinstance(node, Uniform):
        lo, hi, s = compile_arith(node.lo), compile_arith(node.hi), node.site

        def uniform(fr):
            a = lo(fr)
            return a + (hi(fr) - a) * fr.U[:, s]
        return uniform
    if isinstance(node, Cond):
        c, a, b = compile_arith(node.cond), compile_arith(node.then), compile_arith(node.other)

        def cond(fr):
            k = c(fr)
            return np.where(k == 1.0, a(fr), np.where(k == 0.0, b(fr), np.nan))
        return cond
    if isinstance(node, Remap):
        a = compile_arith(node.arg)
        table = np.asarray(node.table + (np.nan,), dtype=float)

        def remap(fr):
            v = np.asarray(a(fr), dtype=float)
            idx = np.where(np.isnan(v), len(table) - 1, v).astype(int)
            return table[idx]
        return remap
    raise TypeError(f"cannot compile {type(node).__name__}")


def _compile_binary(node: Binary) -> Compiled:
    a, b = compile_arith(node.left), compile_arith(node.right)
    op = node.op
    if op == "+":
        return lambda fr: a(fr) + b(fr)
    if op == "-":
        return lambda fr: a(fr) - b(fr)
    if op == "*":
        return lambda fr: a(fr) * b(fr)
    if op == "/":
        def div(fr):
            x, y = a(fr), b(fr)
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.true_divide(x, y)
            return np.where(y == 0, np.nan, q)
        return div
    if op in _CMP:
        f = _CMP[op]

        def cmp(fr):
            x, y = a(fr), b(fr)
            return _undefined_to_nan(f(x, y).astype(float), x, y)
        return cmp
    if op == "&":
        def conj(fr):
            x = a(fr)
            return np.where(x == 0.0, 0.0, np.where(np.isnan(x), np.nan, b(fr)))
        return conj
    if op == "|":
        def disj(fr):
            x = a(fr)
            return np.where(x == 1.0, 1.0, np.where(np.isnan(x), np.nan, b(fr)))
        return disj
    raise ValueError(f"unknown operator {op!r}")


def _compile_call(node: Call) -> Compiled:
    args = [compile_arith(x) for x in node.args]
    fn = node.fn
    if fn == "abs":
        return lambda fr: np.abs(args[0](fr))
    if fn == "floor":
        return lambda fr: np.floor(args[0](fr))
    if fn == "sqrt":
        def sqrt(fr):
            with np.errstate(invalid="ignore"):
                return np.sqrt(args[0](fr))
        return sqrt
    if fn in ("min", "max"):
        red = np.minimum if fn == "min" else np.maximum

        def extremum(fr):
            out = args[0](fr)
            for g in args[1:]:
                out = red(out, g(fr))
            return out
        return extremum
    if fn == "count":
        def count(fr):
            out = args[0](fr)
            for g in args[1:]:
                out = out + g(fr)
            return out
        return count
    raise ValueError(f"unknown function {fn!r}")


# ---------------------------------------------------------------- printing

_PREC = {"|": 1, "&": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4, "+": 5, "-": 5, "*": 6, "/": 6}


def format_number(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e16 else repr(float(x))


def to_text(node: ArithExpr) -> str:
    """Surface syntax of a resolved or unresolved expression."""
    return _text(node, 0)


def _text(node: ArithExpr, ctx: int) -> str:
    if isinstance(node, Num):
        return format_number(node.value)
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, Time):
        return "time"
    if isinstance(node, Remap):
        return _text(node.arg, ctx)
    if isinstance(node, Unary):
        if node.op == "-":
            s, mine = "-" + _text(node.arg, 7), 7
        else:
            s, mine = "!" + _text(node.arg, 3), 3
        return f"({s})" if mine < ctx else s
    if isinstance(node, Binary):
        p = _PREC[node.op]
        if p == 4:
            s = f"{_text(node.left, 5)} {node.op} {_text(node.right, 5)}"
        else:
            s = f"{_text(node.left, p)} {node.op} {_text(node.right, p + 1)}"
        return f"({s})" if p < ctx else s
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(_text(a, 0) for a in node.args) + ")"
    if isinstance(node, Uniform):
        return f"uniform({_text(node.lo, 0)}, {_text(node.hi, 0)})"
    if isinstance(node, Cond):
        s = f"if {_text(node.cond, 0)} then {_text(node.then, 0)} else {_text(node.other, 0)}"
        return f"({s})" if ctx > 0 else s
    name = getattr(node, "name", None)
    if name is not None:
        return name
    raise TypeError(f"cannot print {type(node).__name__}")
