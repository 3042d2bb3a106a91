"""Name resolution, enumeration typing and domain checks for parsed .robtl sources."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..arith import (FUNCTIONS, ArithExpr, Binary, BoolLit, Call, Cond, Const, Frame, Level, Local, Num,
                     Remap, Time, Unary, Uniform, Var, compile_arith, is_constant)
from ..diagnostics import Diagnostic, DiagnosticError, Span
from ..expressions import (AtomDX, AtomSX, Always, DistanceExpr, Eventually, Max, Min, Sigma, TimeInterval,
                           Until, WeightedSum, WEIGHT_TOLERANCE)
from ..logic import (And, Atomic, EventuallyF, Formula, GloballyF, Implies, Not, Or, TrueF, UntilF)
from ..model import DataSpace, DataState, FiniteDomain, IntervalDomain, PenaltyFunction, VariableSpec
from ..perturbation import IDENTITY, At, AtomicEffect, Iter, NIL, Perturbation, Seq
from ..sim import Let, UpdateProgram, UpdateRule
from .parser import RESERVED, parse_document, parse_fragment
from .syntax import Count, Decl, LetStmt, Name, Raw, UpdateStmt


@dataclass(frozen=True, eq=True)
class ModelDocument:
    """A fully resolved model: data space, dynamics, penalties and named queries."""

    constants: dict[str, float]
    space: DataSpace
    init: DataState
    kernel: UpdateProgram
    effects: dict[str, AtomicEffect]
    penalties: dict[str, PenaltyFunction]
    perturbations: dict[str, Perturbation]
    expressions: dict[str, DistanceExpr]
    formulas: dict[str, Formula]
    init_exprs: tuple[tuple[str, ArithExpr], ...] = ()
    sources: tuple[str, ...] = field(default=(), compare=False)

    def lookup(self, name: str):
        for table in (self.formulas, self.expressions, self.perturbations):
            if name in table:
                return table[name]
        raise KeyError(name)


class _Fail(Exception):
    """Resolution of the current item failed; a diagnostic has been recorded."""


_NOWHERE = Span("<model>", 0, 0, 0, 0)

# Kinds of top-level names
_VALUE_KINDS = ("const", "var")


class Resolver:
    def __init__(self, decls: Sequence[Decl], overrides: Optional[Mapping[str, float]] = None,
                 diags: Optional[list[Diagnostic]] = None):
        self.decls = list(decls)
        self.overrides = dict(overrides or {})
        self.diags: list[Diagnostic] = list(diags or [])
        self.table: dict[str, Decl] = {}
        self.constants: dict[str, float] = {}
        self.space: Optional[DataSpace] = None
        self.levels: dict[str, list[FiniteDomain]] = {}
        self.penalties: dict[str, PenaltyFunction] = {}
        self.effects: dict[str, AtomicEffect] = {}
        self.perts: dict[str, Perturbation] = {}
        self.exprs: dict[str, DistanceExpr] = {}
        self.formulas: dict[str, Formula] = {}
        self.busy: set[str] = set()
        # per-program state
        self.locals: dict[str, tuple[int, Optional[FiniteDomain]]] = {}
        self.sites = 0
        self.allow_random = False
        self.allow_vars = True

    def report(self, kind: str, message: str, span: Optional[Span]) -> None:
        self.diags.append(Diagnostic(kind, message, span or _NOWHERE))

    def fail(self, kind: str, message: str, span: Optional[Span]):
        self.report(kind, message, span)
        return _Fail()

    # ------------------------------------------------------------ declarations

    def collect(self) -> None:
        singletons: dict[str, Decl] = {}
        for d in self.decls:
            if d.name is None:
                if d.kind in singletons:
                    self.report("resolution", f"duplicate {d.kind} block (first at {singletons[d.kind].span})",
                                d.span)
                else:
                    singletons[d.kind] = d
                continue
            if d.name in self.table:
                prev = self.table[d.name]
                self.report("resolution", f"{d.name} is already declared as {prev.kind} at {prev.name_span}",
                            d.name_span)
                continue
            self.table[d.name] = d
        self.singletons = singletons
        for name in self.overrides:
            d = self.table.get(name)
            if d is None or d.kind != "const":
                self.report("resolution", f"cannot override {name}: no constant with that name",
                            Span("<override>", 0, 0, 0, 0))

    def kind_of(self, name: str) -> Optional[str]:
        d = self.table.get(name)
        return d.kind if d else None

    # ------------------------------------------------------------ constants

    def const_value(self, name: str, span: Optional[Span]) -> float:
        if name in self.constants:
            return self.constants[name]
        d = self.table[name]
        if name in self.busy:
            raise self.fail("resolution", f"cyclic definition of constant {name}", span)
        self.busy.add(name)
        try:
            saved = (self.allow_random, self.allow_vars, self.locals)
            self.allow_random, self.allow_vars, self.locals = False, False, {}
            try:
                node, _ = self.arith(d.payload)
            finally:
                self.allow_random, self.allow_vars, self.locals = saved
            value = _const_eval(node)
            if math.isnan(value):
                raise self.fail("typing", f"constant {name} is undefined", d.payload.span)
            self.constants[name] = float(self.overrides.get(name, value))
            return self.constants[name]
        finally:
            self.busy.discard(name)

    def count_value(self, c: Count, what: str, integral: bool = True) -> float:
        if c.name is None:
            v = c.value
        else:
            kind = self.kind_of(c.name)
            if kind != "const":
                raise self.fail("resolution", f"unknown constant {c.name}" if kind is None
                                else f"{c.name} is a {kind}, not a constant", c.span)
            v = self.const_value(c.name, c.span)
        if integral and (v < 0 or not float(v).is_integer()):
            raise self.fail("typing", f"{what} must be a natural number, got {_fmt(v)}", c.span)
        return int(v) if integral else float(v)

    # ------------------------------------------------------------ data space

    def build_space(self) -> None:
        variables = []
        for d in self.decls:
            if d.kind != "var" or self.table.get(d.name) is not d:
                continue
            try:
                variables.append(VariableSpec(d.name, self.domain(d)))
            except _Fail:
                variables.append(VariableSpec(d.name, IntervalDomain(-math.inf, math.inf)))
        self.space = DataSpace(tuple(variables))
        for v in variables:
            if v.is_finite:
                for lv in v.domain.levels:
                    doms = self.levels.setdefault(lv, [])
                    if v.domain not in doms:
                        doms.append(v.domain)
        for lv in self.levels:
            if lv in self.table:
                d = self.table[lv]
                self.report("resolution", f"{lv} is both a level and a {d.kind}", d.name_span)

    def domain(self, d: Decl):
        payload = d.payload
        if payload[0] == "enum":
            names = [n for n, _ in payload[1]]
            for (n, sp), k in zip(payload[1], range(len(names))):
                if n in names[:k]:
                    raise self.fail("typing", f"duplicate level {n} in the domain of {d.name}", sp)
            return FiniteDomain(tuple(names))
        saved = self.allow_vars
        self.allow_vars = False
        try:
            lo = _const_eval(self.arith(payload[1])[0])
            hi = _const_eval(self.arith(payload[2])[0])
        finally:
            self.allow_vars = saved
        if not lo <= hi:
            raise self.fail("typing", f"empty interval [{_fmt(lo)}, {_fmt(hi)}] for {d.name}", payload[3])
        return IntervalDomain(lo, hi)

    # ------------------------------------------------------------ arithmetic

    def arith(self, node: ArithExpr, hint: Optional[FiniteDomain] = None):
        """Resolve names in ``node``; returns (node, enum domain or None for numbers)."""
        sp = node.span
        if isinstance(node, (Num, BoolLit, Time)):
            if isinstance(node, Time) and not self.allow_vars:
                raise self.fail("typing", "time is not allowed in a constant", sp)
            return node, None
        if isinstance(node, Name):
            return self.name(node.name, sp, hint)
        if isinstance(node, Unary):
            a, _ = self.arith(node.arg)
            return Unary(node.op, a, span=sp), None
        if isinstance(node, Binary):
            if node.op in ("==", "!="):
                return self.equality(node)
            l, _ = self.arith(node.left)
            r, _ = self.arith(node.right)
            return Binary(node.op, l, r, span=sp), None
        if isinstance(node, Cond):
            c, _ = self.arith(node.cond)
            if hint is None and self.is_bare_level(node.then) and not self.is_bare_level(node.other):
                b, tb = self.arith(node.other)
                a, ta = self.arith(node.then, tb)
            else:
                a, ta = self.arith(node.then, hint)
                b, tb = self.arith(node.other, hint or ta)
            if ta is not None and tb is not None and ta != tb:
                b = Remap(b, _remap_table(tb, ta), span=b.span)
            return Cond(c, a, b, span=sp), (ta if ta is not None and tb is not None else None)
        if isinstance(node, Call):
            return self.call(node)
        raise self.fail("syntax", f"unexpected {type(node).__name__}", sp)

    def equality(self, node: Binary):
        bare = [self.is_bare_level(x) for x in (node.left, node.right)]
        if bare[0] and not bare[1]:
            r, tr = self.arith(node.right)
            l, tl = self.arith(node.left, tr)
        else:
            l, tl = self.arith(node.left)
            r, tr = self.arith(node.right, tl)
        if tl is not None and tr is not None and tl != tr:
            r = Remap(r, _remap_table(tr, tl), span=r.span)
        return Binary(node.op, l, r, span=node.span), None

    def is_bare_level(self, node: ArithExpr) -> bool:
        return (isinstance(node, Name) and node.name in self.levels and node.name not in self.locals
                and node.name not in self.table)

    def name(self, name: str, sp: Optional[Span], hint: Optional[FiniteDomain]):
        if name in self.locals:
            idx, dom = self.locals[name]
            return Local(name, idx, span=sp), dom
        kind = self.kind_of(name)
        if kind == "var":
            if not self.allow_vars:
                raise self.fail("typing", f"variable {name} cannot appear in a constant", sp)
            j = self.space.index(name)
            var = self.space.variables[j]
            return Var(name, j, span=sp), (var.domain if var.is_finite else None)
        if kind == "const":
            return Const(name, self.const_value(name, sp), span=sp), None
        if name in self.levels:
            doms = self.levels[name]
            if hint is not None and name in hint.levels:
                return Level(name, hint.code(name), span=sp), hint
            if hint is not None:
                raise self.fail("typing", f"{name} is not a level of {hint}", sp)
            codes = {d.code(name) for d in doms}
            if len(codes) == 1:
                return Level(name, codes.pop(), span=sp), (doms[0] if len(doms) == 1 else None)
            raise self.fail("typing", f"level {name} is ambiguous here; compare it with a variable", sp)
        if kind is not None:
            raise self.fail("resolution", f"{name} is a {kind}, not a value", sp)
        raise self.fail("resolution", f"unknown name {name}", sp)

    def call(self, node: Call):
        sp = node.span
        if node.fn == "uniform":
            if not self.allow_random:
                raise self.fail("typing", "uniform(lo, hi) is only allowed in kernels and effects", sp)
            if len(node.args) != 2:
                raise self.fail("typing", "uniform takes two arguments", sp)
            lo, _ = self.arith(node.args[0])
            hi, _ = self.arith(node.args[1])
            site = self.sites
            self.sites += 1
            return Uniform(lo, hi, site, span=sp), None
        arity = FUNCTIONS.get(node.fn)
        if arity is None:
            raise self.fail("resolution", f"unknown function {node.fn}", sp)
        n = len(node.args)
        if (arity >= 0 and n != arity) or (arity < 0 and n < -arity):
            want = f"{arity}" if arity >= 0 else f"at least {-arity}"
            raise self.fail("typing", f"{node.fn} takes {want} argument{'s' if arity != 1 else ''}, got {n}", sp)
        return Call(node.fn, tuple(self.arith(a)[0] for a in node.args), span=sp), None

    # ------------------------------------------------------------ programs

    def program(self, items, label: str) -> UpdateProgram:
        self.locals, self.sites, self.allow_random = {}, 0, True
        lets, rules = [], []
        try:
            for it in items:
                try:
                    if isinstance(it, LetStmt):
                        if it.name in self.locals or self.kind_of(it.name) in _VALUE_KINDS:
                            raise self.fail("resolution", f"local {it.name} shadows another name", it.span)
                        v, dom = self.arith(it.value)
                        self.locals[it.name] = (len(lets), dom)
                        lets.append(Let(it.name, v, span=it.span))
                    else:
                        rules.append(self.update(it, label))
                except _Fail:
                    pass
        finally:
            self.locals, self.allow_random = {}, False
        return UpdateProgram(self.space, tuple(lets), tuple(rules))

    def update(self, it: UpdateStmt, label: str) -> UpdateRule:
        kind = self.kind_of(it.target)
        if kind != "var":
            raise self.fail("resolution", f"unknown variable {it.target}" if kind is None
                            else f"cannot update {it.target}: it is a {kind}", it.target_span)
        j = self.space.index(it.target)
        var = self.space.variables[j]
        hint = var.domain if var.is_finite else None
        value, t = self.arith(it.value, hint)
        if var.is_finite:
            if t is None:
                raise self.fail("typing", f"{it.target} is enumerated {var.domain}; "
                                f"cannot assign a number to it in {label}", it.value.span or it.span)
            if t != var.domain:
                value = Remap(value, _remap_table(t, var.domain), span=value.span)
        elif t is not None:
            raise self.fail("typing", f"{it.target} is a number; cannot assign a level to it", it.value.span)
        if is_constant(value) and not any(isinstance(x, Uniform) for x in _walk(value)):
            v = _const_eval(value)
            if not math.isnan(v) and not var.domain.contains(v):
                raise self.fail("domain", f"value {_fmt(v)} assigned to {it.target} is outside {var.domain}",
                                it.span)
        guard = None if it.guard is None else self.arith(it.guard)[0]
        return UpdateRule(it.target, j, value, guard, span=it.span)

    # ------------------------------------------------------------ init

    def init(self, d: Optional[Decl]):
        if d is None:
            self.report("resolution", "the model has no init block", _first_span(self.decls))
            raise _Fail()
        seen: dict[str, Span] = {}
        values: dict[str, float] = {}
        exprs = []
        saved = self.allow_vars
        self.allow_vars = False
        try:
            for name, value, sp, name_sp in d.payload:
                try:
                    if self.kind_of(name) != "var":
                        raise self.fail("resolution", f"unknown variable {name} in init", name_sp)
                    if name in seen:
                        raise self.fail("resolution", f"{name} is initialized twice", name_sp)
                    seen[name] = sp
                    var = self.space[name]
                    node, t = self.arith(value, var.domain if var.is_finite else None)
                    if var.is_finite and t is None:
                        raise self.fail("typing", f"{name} is enumerated {var.domain}; initialize it with a level",
                                        value.span)
                    if var.is_finite and t != var.domain:
                        node = Remap(node, _remap_table(t, var.domain), span=node.span)
                    v = _const_eval(node)
                    if not var.domain.contains(v):
                        raise self.fail("domain", f"initial value {_fmt(v)} of {name} is outside {var.domain}", sp)
                    values[name] = v
                    exprs.append((name, node))
                except _Fail:
                    values.setdefault(name, math.nan)
        finally:
            self.allow_vars = saved
        missing = [n for n in self.space.names if n not in seen]
        if missing:
            self.report("resolution", f"init block does not set {', '.join(missing)}", d.span)
            raise _Fail()
        order = {n: i for i, n in enumerate(self.space.names)}
        exprs.sort(key=lambda x: order[x[0]])
        return DataState(tuple(values[n] for n in self.space.names)), tuple(exprs)

    # ------------------------------------------------------------ penalties and effects

    def penalty(self, name: str) -> PenaltyFunction:
        if name in self.penalties:
            return self.penalties[name]
        d = self.table[name]
        body, _ = self.arith(d.payload)
        self.penalties[name] = PenaltyFunction(name, body)
        return self.penalties[name]

    def effect(self, name: str, span: Optional[Span]) -> AtomicEffect:
        if name == "id":
            return IDENTITY
        if name in self.effects:
            return self.effects[name]
        kind = self.kind_of(name)
        if kind != "effect":
            raise self.fail("resolution", f"unknown effect {name}" if kind is None
                            else f"{name} is a {kind}, not an effect", span)
        d = self.table[name]
        n_before = len(self.diags)
        prog = self.program(d.payload, f"effect {name}")
        if len(self.diags) > n_before:
            raise _Fail()
        self.effects[name] = AtomicEffect(name, prog)
        return self.effects[name]

    # ------------------------------------------------------------ perturbations

    def named(self, name: str, span: Optional[Span], kind: str, cache: dict, build):
        if name in cache:
            return cache[name]
        actual = self.kind_of(name)
        if actual != kind:
            raise self.fail("resolution", f"unknown {kind} {name}" if actual is None
                            else f"{name} is a {actual}, not a {kind}", span)
        if name in self.busy:
            raise self.fail("resolution", f"cyclic definition of {kind} {name}", span)
        self.busy.add(name)
        try:
            cache[name] = build(self.table[name].payload)
        finally:
            self.busy.discard(name)
        return cache[name]

    def pert(self, r: Raw) -> Perturbation:
        k = r.kind
        if k == "nil":
            return NIL
        if k == "at":
            name, delay, name_sp = r.items
            f = self.effect(name, name_sp)
            return At(f, self.count_value(delay, "a delay"), span=r.span)
        if k == "seq":
            return Seq(self.pert(r.items[0]), self.pert(r.items[1]), span=r.span)
        if k == "iter":
            return Iter(self.pert(r.items[0]), self.count_value(r.items[1], "an iteration count"), span=r.span)
        if k == "ref":
            name = r.items[0]
            if self.kind_of(name) == "effect":
                raise self.fail("resolution", f"{name} is an effect; write {name}@0 to apply it", r.span)
            return self.named(name, r.span, "perturbation", self.perts, self.pert)
        raise self.fail("syntax", f"unexpected {k} in a perturbation", r.span)

    # ------------------------------------------------------------ distance expressions

    def interval(self, r: Raw) -> TimeInterval:
        a = self.count_value(r.items[0], "a time bound")
        b = self.count_value(r.items[1], "a time bound")
        if a > b:
            raise self.fail("typing", f"empty time interval [{a},{b}]", r.span)
        return TimeInterval(a, b)

    def unit_value(self, c: Count, what: str) -> float:
        v = self.count_value(c, what, integral=False)
        if not 0.0 <= v <= 1.0:
            raise self.fail("typing", f"{what} {_fmt(v)} is outside [0, 1]", c.span)
        return v

    def dexpr(self, r: Raw) -> DistanceExpr:
        k, it, sp = r.kind, r.items, r.span
        if k in ("sx", "dx"):
            name, name_sp = it
            kind = self.kind_of(name)
            if kind != "penalty":
                raise self.fail("resolution", f"unknown penalty {name}" if kind is None
                                else f"{name} is a {kind}, not a penalty", name_sp)
            rho = self.penalty(name)
            return (AtomSX if k == "sx" else AtomDX)(rho, span=sp)
        if k in ("F", "G"):
            iv = self.interval(it[0])
            return (Eventually if k == "F" else Always)(iv, self.dexpr(it[1]), span=sp)
        if k == "U":
            return Until(self.dexpr(it[0]), self.interval(it[1]), self.dexpr(it[2]), span=sp)
        if k in ("min", "max"):
            return (Min if k == "min" else Max)(self.dexpr(it[0]), self.dexpr(it[1]), span=sp)
        if k == "sum":
            terms = []
            for w, e in it:
                wv = self.count_value(w, "a weight", integral=False)
                if not 0.0 < wv <= 1.0:
                    raise self.fail("typing", f"weight {_fmt(wv)} is outside (0, 1]", w.span)
                terms.append((wv, self.dexpr(e)))
            total = math.fsum(w for w, _ in terms)
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise self.fail("typing", f"weights sum to {total:g}, not 1", sp)
            return WeightedSum(tuple(terms), span=sp)
        if k == "sigma":
            return Sigma(self.dexpr(it[0]), it[1], self.unit_value(it[2], "sigma threshold"), span=sp)
        if k == "ref":
            return self.named(it[0], sp, "expression", self.exprs, self.dexpr)
        raise self.fail("syntax", f"unexpected {k} in a distance expression", sp)

    # ------------------------------------------------------------ formulae

    def formula(self, r: Raw) -> Formula:
        k, it, sp = r.kind, r.items, r.span
        if k == "true":
            return TrueF(span=sp)
        if k == "atomic":
            e = self.dexpr(it[0])
            p = self.pert(it[1])
            return Atomic(e, p, it[2], self.unit_value(it[3], "threshold"), span=sp)
        if k == "!":
            return Not(self.formula(it[0]), span=sp)
        if k in ("&", "|", "->"):
            cls = {"&": And, "|": Or, "->": Implies}[k]
            return cls(self.formula(it[0]), self.formula(it[1]), span=sp)
        if k == "U":
            return UntilF(self.formula(it[0]), self.interval(it[1]), self.formula(it[2]), span=sp)
        if k in ("F", "G"):
            return (EventuallyF if k == "F" else GloballyF)(self.interval(it[0]), self.formula(it[1]), span=sp)
        if k == "ref":
            return self.named(it[0], sp, "formula", self.formulas, self.formula)
        raise self.fail("syntax", f"unexpected {k} in a formula", sp)

    # ------------------------------------------------------------ driver

    def guarded(self, fn, *args):
        try:
            return fn(*args)
        except _Fail:
            return None

    def resolve(self, sources: tuple[str, ...] = ()) -> ModelDocument:
        self.collect()
        for d in self.decls:
            if d.kind == "const" and self.table.get(d.name) is d:
                self.guarded(self.const_value, d.name, d.name_span)
        self.build_space()
        for d in self.decls:
            if d.kind == "penalty" and self.table.get(d.name) is d:
                self.guarded(self.penalty, d.name)
        kernel_decl = self.singletons.get("kernel")
        if kernel_decl is None:
            self.report("resolution", "the model has no kernel block", _first_span(self.decls))
            kernel = UpdateProgram(self.space)
        else:
            kernel = self.program(kernel_decl.payload, "the kernel")
        init = self.guarded(self.init, self.singletons.get("init"))
        for d in self.decls:
            if self.table.get(d.name) is not d:
                continue
            if d.kind == "effect":
                self.guarded(self.effect, d.name, d.name_span)
            elif d.kind == "perturbation":
                self.guarded(self.named, d.name, d.name_span, "perturbation", self.perts, self.pert)
            elif d.kind == "expression":
                self.guarded(self.named, d.name, d.name_span, "expression", self.exprs, self.dexpr)
            elif d.kind == "formula":
                self.guarded(self.named, d.name, d.name_span, "formula", self.formulas, self.formula)
        if self.diags:
            raise DiagnosticError(_dedupe(self.diags))
        state, init_exprs = init

        def ordered(kind, cache):
            return {d.name: cache[d.name] for d in self.decls if d.kind == kind and self.table.get(d.name) is d}

        return ModelDocument(
            constants=ordered("const", self.constants),
            space=self.space, init=state, kernel=kernel,
            effects=ordered("effect", self.effects),
            penalties=ordered("penalty", self.penalties),
            perturbations=ordered("perturbation", self.perts),
            expressions=ordered("expression", self.exprs),
            formulas=ordered("formula", self.formulas),
            init_exprs=init_exprs, sources=sources)


def _dedupe(diags: list[Diagnostic]) -> list[Diagnostic]:
    out, seen = [], set()
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def _first_span(decls) -> Span:
    return decls[0].span if decls else _NOWHERE


def _walk(node):
    yield node
    for c in node.children():
        yield from _walk(c)


def _const_eval(node: ArithExpr) -> float:
    v = compile_arith(node)(Frame(np.zeros((1, 0)), 0))
    return float(np.asarray(v, dtype=float).reshape(-1)[0])


def _remap_table(src: FiniteDomain, dst: FiniteDomain) -> tuple[float, ...]:
    return tuple(dst.code(lv) if lv in dst.levels else -1.0 for lv in src.levels)


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


# ---------------------------------------------------------------- public entry points

def parse_models(sources: Sequence[tuple[str, str]], overrides: Optional[Mapping[str, float]] = None) -> ModelDocument:
    """Parse and resolve one or more source texts sharing a single namespace.

    ``sources`` holds (text, filename) pairs. Raises DiagnosticError listing every
    problem found, ordered by position.
    """
    decls, diags = [], []
    for text, filename in sources:
        ds, dg = parse_document(text, filename)
        decls.extend(ds)
        diags.extend(dg)
    if diags:
        # resolution after error recovery would report spurious follow-up problems
        raise DiagnosticError(_dedupe(diags))
    return Resolver(decls, overrides).resolve(tuple(f for _, f in sources))


def parse_model(text: str, filename: str = "<model>", overrides: Optional[Mapping[str, float]] = None) -> ModelDocument:
    return parse_models([(text, filename)], overrides)


QUERY_KINDS = ("formula", "expression", "perturbation")


def parse_query(text: str, doc: ModelDocument, kind: Optional[str] = None, filename: str = "<query>"):
    """Parse a formula, distance expression or perturbation against ``doc``.

    A bare name is looked up among the document's named queries. Without an
    explicit ``kind`` the kinds are tried in the order formula, expression,
    perturbation. If none fits, the diagnostics reported are those of the
    first kind that parsed syntactically, or else those of the first kind.
    """
    name = text.strip()
    if kind is None and name.isidentifier() and name not in RESERVED:
        try:
            return doc.lookup(name)
        except KeyError:
            pass
    kinds = QUERY_KINDS if kind is None else (kind,)
    first_diags = None
    resolution_diags = None
    for k in kinds:
        raw, diags = parse_fragment(text, k, filename)
        if raw is not None and not diags:
            r = _query_resolver(doc)
            try:
                out = {"formula": r.formula, "expression": r.dexpr, "perturbation": r.pert}[k](raw)
            except _Fail:
                out = None
            if not r.diags:
                return out
            diags = r.diags
            if resolution_diags is None:
                resolution_diags = diags
        if first_diags is None:
            first_diags = diags
    raise DiagnosticError(resolution_diags or first_diags)


def _query_resolver(doc: ModelDocument) -> Resolver:
    """A resolver whose tables are pre-populated from a resolved document."""
    r = Resolver([])
    r.space = doc.space
    r.constants = dict(doc.constants)
    for name in doc.constants:
        r.table[name] = Decl("const", name, None, _NOWHERE)
    for v in doc.space.variables:
        r.table[v.name] = Decl("var", v.name, None, _NOWHERE)
        if v.is_finite:
            for lv in v.domain.levels:
                doms = r.levels.setdefault(lv, [])
                if v.domain not in doms:
                    doms.append(v.domain)
    for kind, table, cache in (("penalty", doc.penalties, r.penalties), ("effect", doc.effects, r.effects),
                               ("perturbation", doc.perturbations, r.perts),
                               ("expression", doc.expressions, r.exprs), ("formula", doc.formulas, r.formulas)):
        for name, obj in table.items():
            r.table[name] = Decl(kind, name, None, _NOWHERE)
            cache[name] = obj
    return r
