"""Guarded-update kernels and sampling of empirical evolution sequences."""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from . import rng as rngmod
from .arith import ArithExpr, Frame, compile_arith, random_sites
from .diagnostics import EvaluationError, Span
from .model import DataSpace, DataState, validate_state


@dataclass(frozen=True)
class Let:
    name: str
    value: ArithExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class UpdateRule:
    target: str
    index: int
    value: ArithExpr
    guard: Optional[ArithExpr] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class UpdateProgram:
    """Synchronous guarded updates: every right-hand side reads the pre-state.

    Rules for the same target are tried in order and the first one whose guard
    holds fires; a variable with no firing rule keeps its value.
    """

    space: DataSpace
    lets: tuple[Let, ...] = ()
    rules: tuple[UpdateRule, ...] = ()

    @cached_property
    def sites(self) -> int:
        exprs = [x.value for x in self.lets]
        for r in self.rules:
            exprs.append(r.value)
            if r.guard is not None:
                exprs.append(r.guard)
        return max((random_sites(e) for e in exprs), default=0)

    @cached_property
    def _compiled(self):
        lets = [compile_arith(x.value) for x in self.lets]
        groups: dict[int, list] = {}
        for r in self.rules:
            guard = None if r.guard is None else compile_arith(r.guard)
            groups.setdefault(r.index, []).append((guard, compile_arith(r.value), r))
        return lets, list(groups.items())

    @property
    def is_identity(self) -> bool:
        return not self.rules

    def apply(self, X: np.ndarray, t: int, U: Optional[np.ndarray] = None) -> np.ndarray:
        """One synchronous update of a (rows, vars) batch at time ``t``.

        ``U`` holds this step's uniform draws, shape (rows, sites). Errors carry
        the batch row as ``trajectory``.
        """
        n = X.shape[0]
        if self.is_identity:
            return X.copy()
        lets, groups = self._compiled
        fr = Frame(X, t, U, [])
        for f in lets:
            fr.L.append(np.broadcast_to(f(fr), (n,)))
        Y = X.copy()
        for target, rules in groups:
            var = self.space.variables[target]
            pending = np.ones(n, dtype=bool)
            for guard, value, rule in rules:
                if guard is None:
                    sel = pending
                else:
                    g = np.broadcast_to(guard(fr), (n,))
                    _fail_if(pending & np.isnan(g), f"guard of update to {rule.target} is undefined",
                             rule.guard.span or rule.span, t)
                    sel = pending & (g == 1.0)
                if sel.any():
                    v = np.broadcast_to(value(fr), (n,))
                    _fail_if(sel & np.isnan(v), f"value assigned to {rule.target} is undefined",
                             rule.value.span or rule.span, t)
                    vs = v[sel]
                    if var.is_finite:
                        ok = (vs >= 0) & (vs < len(var.domain.levels)) & (vs == np.floor(vs))
                    else:
                        ok = (vs >= var.domain.lo) & (vs <= var.domain.hi)
                    if not ok.all():
                        row = int(np.flatnonzero(sel)[np.argmin(ok)])
                        raise EvaluationError(
                            f"value {float(v[row])!r} assigned to {rule.target} is outside {var.domain}",
                            rule.span, trajectory=row, time=t)
                    Y[sel, target] = vs
                    pending = pending & ~sel
                if not pending.any():
                    break
        return Y


def _fail_if(mask: np.ndarray, message: str, span, t: int) -> None:
    if mask.any():
        raise EvaluationError(message, span, trajectory=int(np.argmax(mask)), time=t)


KernelSpec = UpdateProgram


@dataclass(frozen=True)
class SampleSet:
    states: np.ndarray  # (size, vars), read-only
    time: int

    def __len__(self) -> int:
        return self.states.shape[0]

    def state(self, j: int) -> DataState:
        return DataState(tuple(float(x) for x in self.states[j]))

    def fraction(self, predicate) -> float:
        """Empirical measure |E_i ∩ D| / N of the set of states satisfying ``predicate``."""
        hits = sum(1 for j in range(len(self)) if predicate(self.state(j)))
        return hits / len(self)


@dataclass(frozen=True)
class EmpiricalEvolutionSequence:
    space: DataSpace
    sets: tuple[SampleSet, ...]
    seed: int
    N: int
    kernel: Optional[UpdateProgram] = field(default=None, compare=False, repr=False)

    @property
    def horizon(self) -> int:
        return len(self.sets) - 1

    def __getitem__(self, i: int) -> SampleSet:
        return self.sets[i]

    def __len__(self) -> int:
        return len(self.sets)

    def mean(self, name: str) -> np.ndarray:
        j = self.space.index(name)
        return np.array([s.states[:, j].mean() for s in self.sets])

    def identical(self, other: "EmpiricalEvolutionSequence") -> bool:
        """Bitwise equality of all sample sets."""
        return len(self) == len(other) and all(
            a.states.shape == b.states.shape and np.array_equal(a.states, b.states)
            for a, b in zip(self.sets, other.sets))


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("ROBTL_JOBS", "1")))
    except ValueError:
        return 1


def sim_step(kernel: KernelSpec, d: DataState, rng: np.random.Generator, time: int = 0) -> DataState:
    """Sample one successor of ``d``."""
    if validate_state(kernel.space, d):
        raise ValueError(f"invalid state: {validate_state(kernel.space, d)}")
    U = rng.random((1, kernel.sites)) if kernel.sites else None
    Y = kernel.apply(np.asarray([d.values], dtype=float), time, U)
    return DataState(tuple(float(x) for x in Y[0]))


def evolve(kernel: KernelSpec, X: np.ndarray, t0: int, t1: int, seed: int,
           slots: Sequence[int], *, effects: Optional[Sequence[Optional[UpdateProgram]]] = None,
           effect_seed: Optional[int] = None, jobs: int = 1) -> np.ndarray:
    """Run rows of ``X`` (state at ``t0``) up to ``t1``; returns (t1 - t0 + 1, rows, vars).

    Row ``r`` uses the streams of slot ``slots[r]``. When ``effects`` is given,
    ``effects[i - t0]`` (None for the identity) is applied to the state at time
    ``i`` before it is stored and stepped.
    """
    n = X.shape[0]
    slots = list(slots)
    if jobs <= 1 or n < 2 * jobs:
        return _evolve_chunk(kernel, X, t0, t1, seed, slots, effects, effect_seed)
    bounds = np.linspace(0, n, jobs + 1).astype(int)
    parts = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        outs = list(pool.map(
            lambda ab: _evolve_chunk(kernel, X[ab[0]:ab[1]], t0, t1, seed, slots[ab[0]:ab[1]],
                                     effects, effect_seed),
            parts))
    return np.concatenate(outs, axis=1)


def _evolve_chunk(kernel, X, t0, t1, seed, slots, effects, effect_seed):
    n, nv = X.shape
    out = np.empty((t1 - t0 + 1, n, nv))
    U = rngmod.slot_draws(seed, rngmod.KERNEL, slots, t1, kernel.sites)
    if effects is not None:
        eff_sites = max((e.sites for e in effects if e is not None), default=0)
        Ue = rngmod.slot_draws(effect_seed, rngmod.EFFECT, slots, t1 + 1, eff_sites)
    try:
        cur = X
        for i in range(t0, t1 + 1):
            if effects is not None and effects[i - t0] is not None:
                eff = effects[i - t0]
                cur = eff.apply(cur, i, Ue[:, i, :eff.sites] if eff.sites else None)
            out[i - t0] = cur
            if i < t1:
                cur = kernel.apply(cur, i, U[:, i, :] if kernel.sites else None)
    except EvaluationError as err:
        row = err.trajectory
        raise err.at(trajectory=slots[row] if row is not None and row < len(slots) else row) from None
    return out


def simulate(kernel: KernelSpec, d_s: DataState, N: int, k: int, seed: int,
             jobs: Optional[int] = None) -> EmpiricalEvolutionSequence:
    """Sample N trajectories of length k from the Dirac initial state ``d_s``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if k < 0:
        raise ValueError("horizon k must be non-negative")
    bad = validate_state(kernel.space, d_s)
    if bad:
        raise ValueError(f"initial state outside domain for {', '.join(bad)}")
    X0 = np.tile(d_s.as_array(), (N, 1))
    out = evolve(kernel, X0, 0, k, seed, range(N), jobs=jobs or default_jobs())
    return sequence_from_array(kernel, out, seed, N)


def sequence_from_array(kernel: KernelSpec, out: np.ndarray, seed: int, N: int,
                        prefix: Sequence[SampleSet] = ()) -> EmpiricalEvolutionSequence:
    out.setflags(write=False)
    t0 = len(prefix)
    sets = tuple(prefix) + tuple(SampleSet(out[i], t0 + i) for i in range(out.shape[0]))
    return EmpiricalEvolutionSequence(kernel.space, sets, seed, N, kernel)


def trajectories_csv(E: EmpiricalEvolutionSequence) -> str:
    """CSV dump with header ``time,trajectory,<vars...>``, one row per (time, trajectory)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "trajectory", *E.space.names])
    finite = [v.is_finite for v in E.space.variables]
    for s in E.sets:
        for j, row in enumerate(s.states):
            w.writerow([s.time, j, *(int(x) if f else repr(float(x)) for x, f in zip(row, finite))])
    return buf.getvalue()
