"""Perturbation terms: nil, f@delay, sequencing and iteration.

Terms are normalized before stepping: ``p^n`` unfolds to the n-fold sequence
``p ; ... ; p``, ``p^0`` is ``nil``, and ``nil`` is the unit of sequencing.
After normalization a term is ``nil`` or a right-nested chain of ``f@delay``
atoms, and :func:`effect` / :func:`next_` follow the usual clause table on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .diagnostics import Span
from .model import DataState
from .sim import EmpiricalEvolutionSequence, KernelSpec, UpdateProgram, evolve, sequence_from_array, \
    default_jobs


@dataclass(frozen=True)
class AtomicEffect:
    """A state-to-distribution map given as an instantaneous guarded overlay."""

    name: str
    program: Optional[UpdateProgram] = None

    @property
    def is_identity(self) -> bool:
        return self.program is None or self.program.is_identity


IDENTITY = AtomicEffect("id")


@dataclass(frozen=True)
class Perturbation:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Nil(Perturbation):
    pass


@dataclass(frozen=True)
class At(Perturbation):
    effect: AtomicEffect
    delay: int

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("delay must be a natural number")


@dataclass(frozen=True)
class Seq(Perturbation):
    first: Perturbation
    second: Perturbation


@dataclass(frozen=True)
class Iter(Perturbation):
    body: Perturbation
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("iteration count must be a natural number")


NIL = Nil()


def atoms(p: Perturbation) -> Iterator[At]:
    """The f@delay atoms of the unfolded term, in firing order."""
    if isinstance(p, At):
        yield p
    elif isinstance(p, Seq):
        yield from atoms(p.first)
        yield from atoms(p.second)
    elif isinstance(p, Iter):
        body = list(atoms(p.body))
        for _ in range(p.n):
            yield from body


def chain(items: Sequence[At]) -> Perturbation:
    if not items:
        return NIL
    out: Perturbation = items[-1]
    for a in reversed(items[:-1]):
        out = Seq(a, out)
    return out


def is_normal(p: Perturbation) -> bool:
    if isinstance(p, (Nil, At)):
        return True
    return isinstance(p, Seq) and isinstance(p.first, At) and isinstance(p.second, (At, Seq)) \
        and is_normal(p.second)


def normalize(p: Perturbation) -> Perturbation:
    if is_normal(p):
        return p
    return chain(list(atoms(p)))


def effect(p: Perturbation) -> AtomicEffect:
    """The effect applied at the current step."""
    return _effect(normalize(p))


def next_(p: Perturbation) -> Perturbation:
    """The (normalized) perturbation that applies from the next step on."""
    return _next(normalize(p))


def _effect(p: Perturbation) -> AtomicEffect:
    if isinstance(p, At):
        return IDENTITY if p.delay > 0 else p.effect
    if isinstance(p, Seq):
        return _effect(p.first)
    return IDENTITY


def _next(p: Perturbation) -> Perturbation:
    if isinstance(p, At):
        return At(p.effect, p.delay - 1) if p.delay > 0 else NIL
    if isinstance(p, Seq):
        head = _next(p.first)
        return p.second if isinstance(head, Nil) else Seq(head, p.second)
    return NIL


def schedule(p: Perturbation, steps: int) -> list[AtomicEffect]:
    """``effect(next^i(p))`` for i = 0 .. steps-1."""
    out = []
    cur = normalize(p)
    for _ in range(steps):
        out.append(_effect(cur))
        cur = _next(cur)
    return out


def active_length(p: Perturbation) -> int:
    """Steps after which ``next^i(p)`` is nil: total delay plus number of atoms."""
    return sum(a.delay + 1 for a in atoms(p))


def psem_at(p: Perturbation, d: DataState, i: int, rng: np.random.Generator,
            time: Optional[int] = None) -> DataState:
    """Sample the perturbation function of ``p`` at step ``i`` applied to ``d``.

    ``time`` is the absolute time seen by the effect body (defaults to ``i``).
    """
    if i < 0:
        raise ValueError("step must be non-negative")
    cur = normalize(p)
    for _ in range(i):
        cur = _next(cur)
    f = _effect(cur)
    if f.is_identity:
        return d
    prog = f.program
    U = rng.random((1, prog.sites)) if prog.sites else None
    Y = prog.apply(np.asarray([d.values], dtype=float), i if time is None else time, U)
    return DataState(tuple(float(x) for x in Y[0]))


def sim_per(E: EmpiricalEvolutionSequence, p: Perturbation, tau: int, ell: int, seed: int,
            kernel: Optional[KernelSpec] = None, jobs: Optional[int] = None,
            until: Optional[int] = None) -> EmpiricalEvolutionSequence:
    """Branch a perturbed sequence off ``E`` at time ``tau`` with amplification ``ell``.

    Steps before ``tau`` are shared with ``E``. Element j of ``E[tau]`` is
    replicated into slots j*ell .. j*ell+ell-1; from ``tau`` on, each stored state
    is the current effect applied to the kernel's successor (the state at
    ``tau`` is the effect applied to the replicated sample), and the term
    advances by ``next_`` once per time step. ``until`` truncates the result
    at an earlier time than the horizon of ``E``.
    """
    kernel = kernel or E.kernel
    if kernel is None:
        raise ValueError("sequence carries no kernel; pass kernel=")
    if not 0 <= tau <= E.horizon:
        raise ValueError(f"application time {tau} outside [0, {E.horizon}]")
    if ell < 1:
        raise ValueError("amplification must be at least 1")
    k = E.horizon if until is None else max(tau, min(until, E.horizon))
    X = np.repeat(E[tau].states, ell, axis=0)
    effs = [None if f.is_identity else f.program for f in schedule(p, k - tau + 1)]
    out = evolve(kernel, X, tau, k, seed, range(X.shape[0]), effects=effs, effect_seed=seed,
                 jobs=jobs or default_jobs())
    return sequence_from_array(kernel, out, seed, E.N, prefix=E.sets[:tau])


def to_text(p: Perturbation) -> str:
    """Surface syntax of ``p``; ``^`` binds tighter than ``;``, which associates to the left."""
    return _text(p, 0)


def _text(p: Perturbation, ctx: int) -> str:
    if isinstance(p, Nil):
        return "nil"
    if isinstance(p, At):
        return f"{p.effect.name}@{p.delay}"
    if isinstance(p, Seq):
        s = f"{_text(p.first, 1)} ; {_text(p.second, 2)}"
        return f"({s})" if ctx >= 2 else s
    if isinstance(p, Iter):
        body = _text(p.body, 3)
        if not isinstance(p.body, Nil):
            body = f"({body})" if isinstance(p.body, (At, Iter)) else body
        return f"{body}^{p.n}"
    raise TypeError(f"not a perturbation: {p!r}")
