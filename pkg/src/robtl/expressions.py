"""Distance expressions: syntax, point evaluation, interval propagation, depth."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from . import rng as rngmod
from .diagnostics import Span
from .distance import ConfidenceInterval, Direction, bootstrap_ci, compute_wass
from .model import PenaltyFunction
from .sim import EmpiricalEvolutionSequence

RELATIONS = ("<", "<=", ">=", ">")


def compare(x: float, rel: str, y: float) -> bool:
    if rel == "<":
        return x < y
    if rel == "<=":
        return x <= y
    if rel == ">=":
        return x >= y
    if rel == ">":
        return x > y
    raise ValueError(f"unknown relation {rel!r}")


@dataclass(frozen=True)
class TimeInterval:
    a: int
    b: int

    def __post_init__(self):
        if not 0 <= self.a <= self.b:
            raise ValueError(f"bad time interval [{self.a}, {self.b}]")

    def shifted(self, tau: int, h: Optional[int] = None) -> tuple[int, int]:
        """``I + tau`` clipped at the global horizon ``h`` (None: no clipping)."""
        lo, hi = self.a + tau, self.b + tau
        if h is not None:
            lo, hi = min(lo, h), min(hi, h)
        return lo, hi

    def __str__(self):
        return f"[{self.a},{self.b}]"


@dataclass(frozen=True)
class DistanceExpr:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)

    def children(self) -> tuple["DistanceExpr", ...]:
        return ()


@dataclass(frozen=True)
class Atom(DistanceExpr):
    rho: PenaltyFunction

    direction = Direction.SX


@dataclass(frozen=True)
class AtomSX(Atom):
    direction = Direction.SX


@dataclass(frozen=True)
class AtomDX(Atom):
    direction = Direction.DX


@dataclass(frozen=True)
class Eventually(DistanceExpr):
    interval: TimeInterval
    arg: DistanceExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Always(DistanceExpr):
    interval: TimeInterval
    arg: DistanceExpr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(DistanceExpr):
    left: DistanceExpr
    interval: TimeInterval
    right: DistanceExpr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Min(DistanceExpr):
    left: DistanceExpr
    right: DistanceExpr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Max(DistanceExpr):
    left: DistanceExpr
    right: DistanceExpr

    def children(self):
        return (self.left, self.right)


WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightedSum(DistanceExpr):
    terms: tuple[tuple[float, DistanceExpr], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("weighted sum needs at least one term")
        for w, _ in self.terms:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"weight {w} outside (0, 1]")
        total = math.fsum(w for w, _ in self.terms)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValueError(f"weights sum to {total}, expected 1")

    def children(self):
        return tuple(e for _, e in self.terms)


@dataclass(frozen=True)
class Sigma(DistanceExpr):
    arg: DistanceExpr
    rel: str
    zeta: float

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError(f"sigma threshold {self.zeta} outside [0, 1]")

    def children(self):
        return (self.arg,)


TEMPORAL = (Eventually, Always, Until)


def walk(e: DistanceExpr) -> Iterator[DistanceExpr]:
    yield e
    for c in e.children():
        yield from walk(c)


def atoms(e: DistanceExpr) -> list[Atom]:
    """Distinct atoms in first-occurrence order."""
    seen: dict[Atom, None] = {}
    for n in walk(e):
        if isinstance(n, Atom):
            seen.setdefault(n, None)
    return list(seen)


def hdepth(e: DistanceExpr) -> int:
    """Steps past the evaluation time that ``e`` may look at."""
    if isinstance(e, Atom):
        return 0
    if isinstance(e, (Eventually, Always)):
        return e.interval.b + hdepth(e.arg)
    if isinstance(e, Until):
        return e.interval.b + max(hdepth(e.left), hdepth(e.right))
    return max(hdepth(c) for c in e.children())


# ---------------------------------------------------------------- printing

def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


_PREC_UNTIL = 1
_PREC_PREFIX = 2


def to_text(e: DistanceExpr) -> str:
    return _text(e, 0)


def _text(e: DistanceExpr, ctx: int) -> str:
    if isinstance(e, AtomSX):
        return f"sx({e.rho.name})"
    if isinstance(e, AtomDX):
        return f"dx({e.rho.name})"
    if isinstance(e, Eventually):
        return f"F{e.interval} {_text(e.arg, _PREC_PREFIX)}"
    if isinstance(e, Always):
        return f"G{e.interval} {_text(e.arg, _PREC_PREFIX)}"
    if isinstance(e, Until):
        s = f"{_text(e.left, _PREC_PREFIX)} U{e.interval} {_text(e.right, _PREC_PREFIX)}"
        return f"({s})" if ctx >= _PREC_UNTIL else s
    if isinstance(e, Min):
        return f"min({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, Max):
        return f"max({to_text(e.left)}, {to_text(e.right)})"
    if isinstance(e, WeightedSum):
        return "sum(" + ", ".join(f"{_fmt(w)}*{_text(x, _PREC_PREFIX)}" for w, x in e.terms) + ")"
    if isinstance(e, Sigma):
        return f"sigma({to_text(e.arg)}, {e.rel} {_fmt(e.zeta)})"
    raise TypeError(f"not a distance expression: {e!r}")


# ---------------------------------------------------------------- horizon checks

class HorizonError(ValueError):
    """Evaluation would read past the end of the available sequences."""

    def __init__(self, message: str, node=None):
        self.node = node
        super().__init__(message)


def offending_subterm(e: DistanceExpr, tau: int, k: int, h: Optional[int] = None) -> Optional[DistanceExpr]:
    """Deepest subterm whose evaluation at ``tau`` needs a time beyond ``k``, if any."""
    if tau > k:
        return e if isinstance(e, Atom) else _offender(e, min(tau, k), k, h) or e
    return _offender(e, tau, k, h)


def _offender(e, t, k, h):
    if isinstance(e, Atom):
        return e if t > k else None
    if isinstance(e, TEMPORAL):
        _, end = e.interval.shifted(t, h)
        for c in e.children():
            off = _offender(c, min(end, k), k, h)
            if off is not None:
                return off
        return e if end > k else None
    for c in e.children():
        off = _offender(c, t, k, h)
        if off is not None:
            return off
    return None


def check_horizon(e: DistanceExpr, tau: int, k: int, h: Optional[int] = None) -> None:
    off = offending_subterm(e, tau, k, h)
    if off is not None:
        where = f" at {off.span}" if off.span else ""
        raise HorizonError(
            f"evaluating {to_text(e)} at time {tau} needs steps beyond the horizon {k}; "
            f"offending subterm{where}: {to_text(off)}", off)


# ---------------------------------------------------------------- point evaluation

AtomValue = Callable[[Atom, int], float]


def evaluate(e: DistanceExpr, tau: int, atom: AtomValue, h: Optional[int] = None) -> float:
    """Evaluate ``e`` at ``tau`` given atom values ``atom(node, t)``.

    Temporal windows are ``I + t`` clipped at ``h``. Results of every subterm
    are memoized per (node, time) for the duration of the call.
    """
    memo: dict[tuple[int, int], float] = {}

    def ev(x: DistanceExpr, t: int) -> float:
        key = (id(x), t)
        v = memo.get(key)
        if v is None:
            v = _point(x, t)
            memo[key] = v
        return v

    def _point(x, t):
        if isinstance(x, Atom):
            return float(atom(x, t))
        if isinstance(x, Eventually):
            s, end = x.interval.shifted(t, h)
            return min(ev(x.arg, u) for u in range(s, end + 1))
        if isinstance(x, Always):
            s, end = x.interval.shifted(t, h)
            return max(ev(x.arg, u) for u in range(s, end + 1))
        if isinstance(x, Until):
            s, end = x.interval.shifted(t, h)
            best = math.inf
            prefix = 0.0
            for u in range(s, end + 1):
                best = min(best, max(ev(x.right, u), prefix))
                prefix = max(prefix, ev(x.left, u))
            return best
        if isinstance(x, Min):
            return min(ev(x.left, t), ev(x.right, t))
        if isinstance(x, Max):
            return max(ev(x.left, t), ev(x.right, t))
        if isinstance(x, WeightedSum):
            return min(1.0, math.fsum(w * ev(c, t) for w, c in x.terms))
        if isinstance(x, Sigma):
            return 0.0 if compare(ev(x.arg, t), x.rel, x.zeta) else 1.0
        raise TypeError(f"not a distance expression: {x!r}")

    return ev(e, tau)


# ---------------------------------------------------------------- interval evaluation

AtomInterval = Callable[[Atom, int], ConfidenceInterval]

_NAN = float("nan")


def _triple(ci: ConfidenceInterval) -> tuple[float, float, float]:
    return ci.lo, ci.mean, ci.hi


def evaluate_ci(e: DistanceExpr, tau: int, atom: AtomInterval, h: Optional[int] = None) -> ConfidenceInterval:
    """Propagate atom intervals through ``e`` by applying each operator to the endpoints."""
    memo: dict[tuple[int, int], ConfidenceInterval] = {}
    proto: list[ConfidenceInterval] = []

    def ev(x, t) -> ConfidenceInterval:
        key = (id(x), t)
        v = memo.get(key)
        if v is None:
            v = _interval(x, t)
            memo[key] = v
        return v

    def make(lo, mean, hi) -> ConfidenceInterval:
        p = proto[0] if proto else None
        return ConfidenceInterval(lo, hi, p.level if p else _NAN, mean, _NAN, p.m if p else 0)

    def pointwise(f, cis):
        cols = list(zip(*(_triple(c) for c in cis)))
        return make(*(f(col) for col in cols))

    def _interval(x, t):
        if isinstance(x, Atom):
            ci = atom(x, t)
            proto[:] = [ci]
            return ci
        if isinstance(x, Eventually):
            s, end = x.interval.shifted(t, h)
            return pointwise(min, [ev(x.arg, u) for u in range(s, end + 1)])
        if isinstance(x, Always):
            s, end = x.interval.shifted(t, h)
            return pointwise(max, [ev(x.arg, u) for u in range(s, end + 1)])
        if isinstance(x, Until):
            s, end = x.interval.shifted(t, h)
            lefts = [_triple(ev(x.left, u)) for u in range(s, end + 1)]
            rights = [_triple(ev(x.right, u)) for u in range(s, end + 1)]
            out = []
            for j in range(3):
                best, prefix = math.inf, 0.0
                for lv, rv in zip(lefts, rights):
                    best = min(best, max(rv[j], prefix))
                    prefix = max(prefix, lv[j])
                out.append(best)
            return make(*out)
        if isinstance(x, Min):
            return pointwise(min, [ev(x.left, t), ev(x.right, t)])
        if isinstance(x, Max):
            return pointwise(max, [ev(x.left, t), ev(x.right, t)])
        if isinstance(x, WeightedSum):
            parts = [(w, _triple(ev(c, t))) for w, c in x.terms]
            return make(*(min(1.0, math.fsum(w * v[j] for w, v in parts)) for j in range(3)))
        if isinstance(x, Sigma):
            lo, mean, hi = _triple(ev(x.arg, t))
            inside_lo, inside_hi = compare(lo, x.rel, x.zeta), compare(hi, x.rel, x.zeta)
            mid = 0.0 if compare(mean, x.rel, x.zeta) else 1.0
            if inside_lo and inside_hi:
                return make(0.0, 0.0, 0.0)
            if not inside_lo and not inside_hi:
                return make(1.0, 1.0, 1.0)
            return make(0.0, mid, 1.0)
        raise TypeError(f"not a distance expression: {x!r}")

    return ev(e, tau)


# ---------------------------------------------------------------- sequence-level entry points

def _atom_key(a: Atom) -> int:
    return rngmod.text_key(to_text(a))


def eval_expr(E: EmpiricalEvolutionSequence, E2: EmpiricalEvolutionSequence, tau: int, e: DistanceExpr,
              h: Optional[int] = None) -> float:
    """Value of ``e`` at ``tau`` between nominal ``E`` and perturbed ``E2``."""
    check_horizon(e, tau, min(E.horizon, E2.horizon), h)
    return evaluate(e, tau, lambda a, t: compute_wass(E[t], E2[t], a.direction, a.rho, t), h)


def eval_expr_ci(E: EmpiricalEvolutionSequence, E2: EmpiricalEvolutionSequence, tau: int, e: DistanceExpr,
                 m: int = 50, level: float = 0.95, seed: int = 0, h: Optional[int] = None) -> ConfidenceInterval:
    """Confidence interval of ``e`` at ``tau``; each (atom, time) bootstraps from its own stream."""
    check_horizon(e, tau, min(E.horizon, E2.horizon), h)

    def atom(a: Atom, t: int) -> ConfidenceInterval:
        rng = rngmod.stream(seed, rngmod.BOOTSTRAP, _atom_key(a), t)
        return bootstrap_ci(E[t], E2[t], a.direction, a.rho, t, m=m, level=level, rng=rng)
    return evaluate_ci(e, tau, atom, h)

