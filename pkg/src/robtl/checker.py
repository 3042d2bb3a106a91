"""Statistical checking of RobTL formulae over sampled evolution sequences."""
from __future__ import annotations

import threading
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Optional

from . import expressions as ex
from . import logic
from . import rng as rngmod
from .distance import ConfidenceInterval, bootstrap_ci, compute_wass, z_quantile
from .expressions import Atom, DistanceExpr, hdepth
from .logic import Atomic, Formula, ThreeValued
from .model import DataState
from .perturbation import Perturbation, sim_per, to_text as pert_text
from .sim import EmpiricalEvolutionSequence, KernelSpec, simulate


@dataclass(frozen=True)
class CheckConfig:
    N: int = 100
    ell: int = 10
    m: int = 50
    level: float = 0.95
    seed: int = 0
    h: Optional[int] = None
    jobs: Optional[int] = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.ell < 1:
            raise ValueError("amplification ell must be at least 1")
        if self.m < 2:
            raise ValueError("bootstrap count m must be at least 2")
        z_quantile(self.level)
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.h is not None and self.h < 0:
            raise ValueError("horizon cap must be non-negative")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("jobs")
        return d


def delta_key(expr: DistanceExpr, pert: Perturbation) -> str:
    return f"D[{ex.to_text(expr)}, {pert_text(pert)}]"


def perturbed_suffix(E: EmpiricalEvolutionSequence, p: Perturbation, tau: int, ell: int, seed: int,
                     until: Optional[int] = None, jobs: Optional[int] = None) -> EmpiricalEvolutionSequence:
    """``E`` before ``tau``, then ``ell`` perturbed continuations of every sample of ``E[tau]``."""
    return sim_per(E, p, tau, ell, seed, jobs=jobs, until=until)


# (atom, time, point value) -> interval; lets tests substitute exact or degenerate intervals
IntervalHook = Callable[[Atom, int, float], ConfidenceInterval]


def _hull(ci: ConfidenceInterval, v: float) -> ConfidenceInterval:
    if ci.lo <= v <= ci.hi:
        return ci
    return ConfidenceInterval(min(ci.lo, v), max(ci.hi, v), ci.level, ci.mean, ci.se, ci.m)


class Checker:
    """Evaluates formulae against one nominal sequence, memoizing distances per (Δ, time).

    Atoms differing only in relation or threshold share one perturbed suffix,
    so threshold sweeps compare verdicts on identical samples. Suffixes are
    rebuilt on demand from their derived seeds rather than cached.
    """

    def __init__(self, E: EmpiricalEvolutionSequence, config: CheckConfig,
                 interval_hook: Optional[IntervalHook] = None):
        if E.kernel is None:
            raise ValueError("nominal sequence carries no kernel")
        self.E = E
        self.config = config
        self.interval_hook = interval_hook
        self._values: dict[tuple[str, int], float] = {}
        self._intervals: dict[tuple[str, int], tuple[float, ConfidenceInterval]] = {}
        self._lock = threading.Lock()
        self.suffixes_built = 0

    # -- distances

    def suffix_seed(self, key: str, tau: int) -> int:
        return rngmod.derive_seed(self.config.seed, rngmod.text_key(key), tau)

    def _limit(self, expr: DistanceExpr, tau: int) -> int:
        end = tau + hdepth(expr)
        return end if self.config.h is None else min(end, self.config.h)

    def suffix(self, expr: DistanceExpr, pert: Perturbation, tau: int, until: Optional[int] = None):
        seed = self.suffix_seed(delta_key(expr, pert), tau)
        with self._lock:
            self.suffixes_built += 1
        return perturbed_suffix(self.E, pert, tau, self.config.ell, seed,
                                until=self._limit(expr, tau) if until is None else until,
                                jobs=self.config.jobs)

    def _point_fn(self, S):
        E = self.E

        def point(a: Atom, t: int) -> float:
            return compute_wass(E[t], S[t], a.direction, a.rho, t)
        return point

    def _interval_fn(self, S, seed: int, point):
        E, cfg = self.E, self.config

        def interval(a: Atom, t: int) -> ConfidenceInterval:
            v = point(a, t)
            if self.interval_hook is not None:
                return self.interval_hook(a, t, v)
            rng = rngmod.stream(seed, rngmod.BOOTSTRAP, rngmod.text_key(ex.to_text(a)), t)
            ci = bootstrap_ci(E[t], S[t], a.direction, a.rho, t, m=cfg.m, level=cfg.level, rng=rng)
            return _hull(ci, v)
        return interval

    def distance(self, expr: DistanceExpr, pert: Perturbation, tau: int) -> float:
        """Point estimate of Δ(expr, pert) at ``tau``."""
        key = (delta_key(expr, pert), tau)
        with self._lock:
            v = self._values.get(key)
        if v is not None:
            return v
        ex.check_horizon(expr, tau, self.E.horizon, self.config.h)
        S = self.suffix(expr, pert, tau)
        v = ex.evaluate(expr, tau, _cached(self._point_fn(S)), self.config.h)
        with self._lock:
            self._values[key] = v
        return v

    def distance_ci(self, expr: DistanceExpr, pert: Perturbation, tau: int) -> tuple[float, ConfidenceInterval]:
        """Point estimate and bootstrap interval of Δ(expr, pert) at ``tau``.

        Atom intervals are widened to contain the atom's point estimate when the
        bootstrap interval misses it, so the composite interval always contains
        the composite point value.
        """
        key = (delta_key(expr, pert), tau)
        with self._lock:
            hit = self._intervals.get(key)
        if hit is not None:
            return hit
        ex.check_horizon(expr, tau, self.E.horizon, self.config.h)
        S = self.suffix(expr, pert, tau)
        point = _cached(self._point_fn(S))
        v = ex.evaluate(expr, tau, point, self.config.h)
        ci = ex.evaluate_ci(expr, tau, self._interval_fn(S, self.suffix_seed(key[0], tau), point), self.config.h)
        with self._lock:
            self._values[key] = v
            self._intervals[key] = (v, ci)
        return v, ci

    def series(self, expr: DistanceExpr, pert: Perturbation, at: int, times: Iterable[int],
               with_ci: bool = False) -> list[tuple[int, float, Optional[ConfidenceInterval]]]:
        """Values of ``expr`` at each of ``times`` against one perturbation applied at ``at``.

        Times before ``at`` compare the nominal prefix with itself.
        """
        times = list(times)
        if not times:
            return []
        for t in times:
            ex.check_horizon(expr, t, self.E.horizon, self.config.h)
        seed = self.suffix_seed(delta_key(expr, pert), at)
        until = max(self._limit(expr, t) for t in times)
        S = perturbed_suffix(self.E, pert, at, self.config.ell, seed, until=until, jobs=self.config.jobs)
        point = _cached(self._point_fn(S))
        interval = _cached(self._interval_fn(S, seed, point)) if with_ci else None
        out = []
        for t in times:
            v = ex.evaluate(expr, t, point, self.config.h)
            ci = ex.evaluate_ci(expr, t, interval, self.config.h) if with_ci else None
            out.append((t, v, ci))
        return out

    # -- formulae

    def atomic_bool(self, a: Atomic, tau: int) -> bool:
        return ex.compare(self.distance(a.expr, a.pert, tau), a.rel, a.eta)

    def atomic_omega(self, a: Atomic, tau: int) -> ThreeValued:
        v, ci = self.distance_ci(a.expr, a.pert, tau)
        if ci.lo < ci.hi and ci.lo <= a.eta <= ci.hi:
            return ThreeValued.UNKNOWN
        return ThreeValued.lift(ex.compare(v, a.rel, a.eta))

    def eval_bool(self, phi: Formula, tau: int = 0) -> bool:
        logic.check_horizon(phi, tau, self.E.horizon, self.config.h)
        res = logic.evaluate(phi, tau, lambda a, t: ThreeValued.lift(self.atomic_bool(a, t)), self.config.h)
        return res is ThreeValued.TRUE

    def omega(self, phi: Formula, tau: int = 0) -> ThreeValued:
        logic.check_horizon(phi, tau, self.E.horizon, self.config.h)
        return logic.evaluate(phi, tau, self.atomic_omega, self.config.h)


def _cached(fn):
    memo: dict[tuple[int, int], object] = {}
    lock = threading.Lock()

    def wrapper(a, t):
        key = (id(a), t)
        with lock:
            if key in memo:
                return memo[key]
        v = fn(a, t)
        with lock:
            memo[key] = v
        return v
    return wrapper


def required_horizon(phi: Formula, config: CheckConfig, tau: int = 0) -> int:
    k = tau + logic.horizon(phi)
    return k if config.h is None else min(k, config.h)


def nominal(kernel: KernelSpec, d_s: DataState, k: int, config: CheckConfig) -> EmpiricalEvolutionSequence:
    return simulate(kernel, d_s, config.N, k, config.seed, jobs=config.jobs)


def eval_bool(E: EmpiricalEvolutionSequence, ell: int, tau: int, phi: Formula, config: CheckConfig) -> bool:
    cfg = config if ell == config.ell else CheckConfig(**{**asdict(config), "ell": ell})
    return Checker(E, cfg).eval_bool(phi, tau)


def omega(E: EmpiricalEvolutionSequence, ell: int, tau: int, phi: Formula, config: CheckConfig) -> ThreeValued:
    cfg = config if ell == config.ell else CheckConfig(**{**asdict(config), "ell": ell})
    return Checker(E, cfg).omega(phi, tau)


def sat(kernel: KernelSpec, d_s: DataState, phi: Formula, config: CheckConfig) -> bool:
    """Simulate up to the horizon of ``phi`` and decide it at time 0."""
    E = nominal(kernel, d_s, required_horizon(phi, config), config)
    return Checker(E, config).eval_bool(phi, 0)
