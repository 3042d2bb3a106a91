"""RobTL formulae, their horizon, and a generic evaluator over Kleene's three-valued logic.

Boolean satisfaction is the special case where every atomic proposition
evaluates to TRUE or FALSE: Kleene's tables then coincide with classical logic.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from . import expressions as ex
from .diagnostics import Span
from .expressions import DistanceExpr, RELATIONS, TimeInterval, hdepth
from .perturbation import Perturbation, to_text as pert_text


class ThreeValued(enum.IntEnum):
    FALSE = -1
    UNKNOWN = 0
    TRUE = 1

    @classmethod
    def lift(cls, b: bool) -> "ThreeValued":
        return cls.TRUE if b else cls.FALSE

    def __invert__(self) -> "ThreeValued":
        return ThreeValued(-int(self))

    def __and__(self, other):
        return ThreeValued(min(int(self), int(other)))

    def __or__(self, other):
        return ThreeValued(max(int(self), int(other)))

    @property
    def symbol(self) -> str:
        return {1: "⊤", 0: "⋓", -1: "⊥"}[int(self)]

    @property
    def word(self) -> str:
        return {1: "true", 0: "unknown", -1: "false"}[int(self)]


TRUE, UNKNOWN, FALSE = ThreeValued.TRUE, ThreeValued.UNKNOWN, ThreeValued.FALSE


@dataclass(frozen=True)
class Formula:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> tuple["Formula", ...]:
        return ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Atomic(Formula):
    expr: DistanceExpr
    pert: Perturbation
    rel: str
    eta: float

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"threshold {self.eta} outside [0, 1]")

    @property
    def key(self) -> str:
        """Identity of the distance Δ(expr, pert), shared by atoms differing only in threshold."""
        return f"D[{ex.to_text(self.expr)}, {pert_text(self.pert)}]"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class UntilF(Formula):
    left: Formula
    interval: TimeInterval
    right: Formula

    def children(self):
        return (self.left, self.right)


# Derived operators are kept as nodes so that printing preserves what was written.

@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class EventuallyF(Formula):
    interval: TimeInterval
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class GloballyF(Formula):
    interval: TimeInterval
    arg: Formula

    def children(self):
        return (self.arg,)


TEMPORAL = (UntilF, EventuallyF, GloballyF)


def walk(phi: Formula) -> Iterator[Formula]:
    yield phi
    for c in phi.children():
        yield from walk(c)


def atomics(phi: Formula) -> list[Atomic]:
    seen: dict[Atomic, None] = {}
    for n in walk(phi):
        if isinstance(n, Atomic):
            seen.setdefault(n, None)
    return list(seen)


def horizon(phi: Formula) -> int:
    """Number of steps past the evaluation time needed to decide ``phi``."""
    if isinstance(phi, TrueF):
        return 0
    if isinstance(phi, Atomic):
        return hdepth(phi.expr)
    if isinstance(phi, TEMPORAL):
        return phi.interval.b + max(horizon(c) for c in phi.children())
    return max(horizon(c) for c in phi.children())


def desugar(phi: Formula) -> Formula:
    """Rewrite derived operators into True / Atomic / Not / And / Until."""
    if isinstance(phi, (TrueF, Atomic)):
        return phi
    if isinstance(phi, Not):
        return Not(desugar(phi.arg))
    if isinstance(phi, And):
        return And(desugar(phi.left), desugar(phi.right))
    if isinstance(phi, UntilF):
        return UntilF(desugar(phi.left), phi.interval, desugar(phi.right))
    if isinstance(phi, Or):
        return Not(And(Not(desugar(phi.left)), Not(desugar(phi.right))))
    if isinstance(phi, Implies):
        return Not(And(desugar(phi.left), Not(desugar(phi.right))))
    if isinstance(phi, EventuallyF):
        return UntilF(TrueF(), phi.interval, desugar(phi.arg))
    if isinstance(phi, GloballyF):
        return Not(UntilF(TrueF(), phi.interval, Not(desugar(phi.arg))))
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------- printing

_P_IMPLIES, _P_OR, _P_AND, _P_UNTIL, _P_UNARY = 1, 2, 3, 4, 5


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def to_text(phi: Formula) -> str:
    return _text(phi, 0)


def _paren(s: str, mine: int, ctx: int) -> str:
    return f"({s})" if mine < ctx else s


def _text(phi: Formula, ctx: int) -> str:
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, Atomic):
        return f"D[{ex.to_text(phi.expr)}, {pert_text(phi.pert)}] {phi.rel} {_fmt(phi.eta)}"
    if isinstance(phi, Not):
        return "!" + _text(phi.arg, _P_UNARY)
    if isinstance(phi, EventuallyF):
        return f"F{phi.interval} " + _text(phi.arg, _P_UNARY)
    if isinstance(phi, GloballyF):
        return f"G{phi.interval} " + _text(phi.arg, _P_UNARY)
    if isinstance(phi, UntilF):
        s = f"{_text(phi.left, _P_UNARY)} U{phi.interval} {_text(phi.right, _P_UNARY)}"
        return _paren(s, _P_UNTIL, ctx)
    if isinstance(phi, And):
        return _paren(f"{_text(phi.left, _P_AND)} & {_text(phi.right, _P_AND + 1)}", _P_AND, ctx)
    if isinstance(phi, Or):
        return _paren(f"{_text(phi.left, _P_OR)} | {_text(phi.right, _P_OR + 1)}", _P_OR, ctx)
    if isinstance(phi, Implies):
        return _paren(f"{_text(phi.left, _P_IMPLIES + 1)} -> {_text(phi.right, _P_IMPLIES)}", _P_IMPLIES, ctx)
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------- horizon check

def offending_subterm(phi: Formula, tau: int, k: int, h: Optional[int] = None):
    """Deepest formula or expression subterm needing a time beyond ``k`` at ``tau``."""
    if isinstance(phi, TrueF):
        return phi if tau > k else None
    if isinstance(phi, Atomic):
        if tau > k:
            return phi
        return ex.offending_subterm(phi.expr, tau, k, h)
    if isinstance(phi, TEMPORAL):
        _, end = phi.interval.shifted(tau, h)
        for c in phi.children():
            off = offending_subterm(c, min(end, k), k, h)
            if off is not None:
                return off
        return phi if end > k else None
    for c in phi.children():
        off = offending_subterm(c, tau, k, h)
        if off is not None:
            return off
    return None


def check_horizon(phi: Formula, tau: int, k: int, h: Optional[int] = None) -> None:
    off = offending_subterm(phi, tau, k, h)
    if off is not None:
        text = to_text(off) if isinstance(off, Formula) else ex.to_text(off)
        where = f" at {off.span}" if off.span else ""
        raise ex.HorizonError(
            f"checking {to_text(phi)} at time {tau} needs steps beyond the horizon {k}; "
            f"offending subterm{where}: {text}", off)


# ---------------------------------------------------------------- evaluation core

AtomicVerdict = Callable[[Atomic, int], ThreeValued]


def evaluate(phi: Formula, tau: int, atomic: AtomicVerdict, h: Optional[int] = None) -> ThreeValued:
    """Kleene evaluation of ``phi`` at ``tau`` given verdicts of atomic propositions.

    Until quantifies over the shifted window ``I + t`` clipped at ``h``: it holds
    when some point of the window satisfies the right operand and every earlier
    point of the window satisfies the left one.
    """
    memo: dict[tuple[int, int], ThreeValued] = {}

    def ev(x: Formula, t: int) -> ThreeValued:
        key = (id(x), t)
        v = memo.get(key)
        if v is None:
            v = _eval(x, t)
            memo[key] = v
        return v

    def until(left: Optional[Formula], interval: TimeInterval, right: Formula, t: int, negate_right=False):
        s, end = interval.shifted(t, h)
        acc = FALSE
        prefix = TRUE
        for u in range(s, end + 1):
            r = ev(right, u)
            if negate_right:
                r = ~r
            acc = acc | (r & prefix)
            if acc is TRUE:
                break
            if left is not None:
                prefix = prefix & ev(left, u)
                if prefix is FALSE:
                    break
        return acc

    def _eval(x: Formula, t: int) -> ThreeValued:
        if isinstance(x, TrueF):
            return TRUE
        if isinstance(x, Atomic):
            return ThreeValued(atomic(x, t))
        if isinstance(x, Not):
            return ~ev(x.arg, t)
        if isinstance(x, And):
            a = ev(x.left, t)
            return a if a is FALSE else a & ev(x.right, t)
        if isinstance(x, Or):
            a = ev(x.left, t)
            return a if a is TRUE else a | ev(x.right, t)
        if isinstance(x, Implies):
            a = ~ev(x.left, t)
            return a if a is TRUE else a | ev(x.right, t)
        if isinstance(x, UntilF):
            return until(x.left, x.interval, x.right, t)
        if isinstance(x, EventuallyF):
            return until(None, x.interval, x.arg, t)
        if isinstance(x, GloballyF):
            return ~until(None, x.interval, x.arg, t, negate_right=True)
        raise TypeError(f"not a formula: {x!r}")

    return ev(phi, tau)
