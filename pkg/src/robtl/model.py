"""Data spaces, data states and penalty functions."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union

import numpy as np

from .arith import ArithExpr, compile_arith, Frame


class ArityError(ValueError):
    """A data state does not have one value per variable of the space."""


@dataclass(frozen=True)
class FiniteDomain:
    """Named levels encoded as 0, 1, 2, ... in declaration order."""

    levels: tuple[str, ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("finite domain needs at least one level")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"duplicate levels in {self.levels}")

    def code(self, level: str) -> float:
        return float(self.levels.index(level))

    def level(self, code: float) -> str:
        if not self.contains(code):
            raise ValueError(f"{code!r} does not encode a level of {self.levels}")
        return self.levels[int(code)]

    def contains(self, value: float) -> bool:
        return float(value).is_integer() and 0 <= value < len(self.levels)

    def __str__(self):
        return "{" + ", ".join(self.levels) + "}"


@dataclass(frozen=True)
class IntervalDomain:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def __str__(self):
        return f"[{_num(self.lo)}, {_num(self.hi)}]"


Domain = Union[FiniteDomain, IntervalDomain]


def _num(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class VariableSpec:
    name: str
    domain: Domain

    @property
    def is_finite(self) -> bool:
        return isinstance(self.domain, FiniteDomain)


@dataclass(frozen=True)
class DataSpace:
    variables: tuple[VariableSpec, ...]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __getitem__(self, name: str) -> VariableSpec:
        return self.variables[self._index[name]]

    def __len__(self) -> int:
        return len(self.variables)

    def state(self, values: Mapping[str, Union[float, str]]) -> "DataState":
        """Build a state from a name -> value mapping; levels may be given by name."""
        missing = [n for n in self.names if n not in values]
        if missing:
            raise ArityError(f"no value for {', '.join(missing)}")
        out = []
        for var in self.variables:
            v = values[var.name]
            if isinstance(v, str):
                if not var.is_finite:
                    raise ValueError(f"{var.name} is not enumerated")
                v = var.domain.code(v)
            out.append(float(v))
        return DataState(tuple(out))


@dataclass(frozen=True)
class DataState:
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def get(self, space: DataSpace, name: str) -> float:
        return self.values[space.index(name)]

    def describe(self, space: DataSpace) -> dict[str, Union[float, str]]:
        """Name -> value with enumerated values shown as level names."""
        out: dict[str, Union[float, str]] = {}
        for var, v in zip(space.variables, self.values):
            out[var.name] = var.domain.level(v) if var.is_finite else v
        return out

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def validate_state(space: DataSpace, d: Union[DataState, Iterable[float]]) -> list[str]:
    """Return the names of variables whose value lies outside their domain.

    An empty list means the state is valid. Raises ArityError when the state
    does not have exactly one value per variable.
    """
    values = d.values if isinstance(d, DataState) else tuple(d)
    if len(values) != len(space):
        raise ArityError(f"state has {len(values)} values, space has {len(space)} variables")
    return [var.name for var, v in zip(space.variables, values) if not var.domain.contains(v)]


def domain_violations(space: DataSpace, X: np.ndarray) -> np.ndarray:
    """Boolean mask (rows, vars) of out-of-domain entries of a batch of states."""
    bad = np.zeros(X.shape, dtype=bool)
    for j, var in enumerate(space.variables):
        col = X[:, j]
        if var.is_finite:
            bad[:, j] = ~((col >= 0) & (col < len(var.domain.levels)) & (col == np.floor(col)))
        else:
            bad[:, j] = ~((col >= var.domain.lo) & (col <= var.domain.hi))
    return bad


@dataclass
class PenaltyStats:
    """Mutable diagnostics attached to an otherwise immutable penalty."""

    evaluations: int = 0
    clamped: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, n: int, clamped: int) -> None:
        with self._lock:
            self.evaluations += n
            self.clamped += clamped


class PenaltyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PenaltyFunction:
    """A time-indexed penalty rho_t: D -> [0, 1] given by an arithmetic body.

    The body may mention variables, constants and ``time``; results outside
    [0, 1] are clamped and counted in ``stats``.
    """

    name: str
    body: ArithExpr
    stats: PenaltyStats = field(default_factory=PenaltyStats, compare=False, repr=False, hash=False)

    @cached_property
    def _fn(self):
        return compile_arith(self.body)

    def project(self, X: np.ndarray, time: int) -> np.ndarray:
        """Penalties of every row of a (rows, vars) state batch at ``time``."""
        out = np.array(np.broadcast_to(self._fn(Frame(X, time)), (X.shape[0],)), dtype=float)
        if out.size and np.isnan(out.min()):
            raise PenaltyError(f"penalty {self.name} is undefined on some state at time {time}")
        clamped = int(np.count_nonzero(out < 0.0)) + int(np.count_nonzero(out > 1.0))
        np.clip(out, 0.0, 1.0, out=out)
        self.stats.record(out.size, clamped)
        return out


def eval_penalty(rho: PenaltyFunction, time: int, d: DataState) -> float:
    return float(rho.project(np.asarray([d.values], dtype=float), time)[0])
