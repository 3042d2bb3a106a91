"""Penalty-projected Wasserstein estimation and empirical-bootstrap intervals."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import PenaltyFunction
from .sim import SampleSet


class Direction(enum.Enum):
    SX = "sx"  # how much the second (perturbed) sample is worse than the first
    DX = "dx"  # the reverse

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    mean: float
    se: float
    m: int

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @classmethod
    def point(cls, value: float, level: float = 0.95, m: int = 0) -> "ConfidenceInterval":
        return cls(value, value, level, value, 0.0, m)


def z_quantile(level: float) -> float:
    """Two-sided standard normal quantile for confidence ``level`` (0.95 -> 1.95996...)."""
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    return NormalDist().inv_cdf(1.0 - (1.0 - level) / 2.0)


def _ratio(n1: int, n2: int) -> int:
    if n1 == 0 or n2 % n1 != 0:
        raise ValueError(f"second sample size {n2} is not an integer multiple of {n1}")
    return n2 // n1


def wass_sorted(omega: np.ndarray, nu: np.ndarray, op: Direction) -> float:
    """The estimator on already sorted projections (|nu| = ell * |omega|)."""
    ell = _ratio(len(omega), len(nu))
    return _wass_inplace(omega, np.array(nu, dtype=float), ell, op)


def _wass_inplace(omega: np.ndarray, nu: np.ndarray, ell: int, op: Direction) -> float:
    # broadcast each omega sample over its block of ell nu samples, overwriting nu
    blocks = nu.reshape(len(omega), ell)
    if op is Direction.SX:
        np.subtract(blocks, omega[:, None], out=blocks)
    else:
        np.subtract(omega[:, None], blocks, out=blocks)
    np.maximum(nu, 0.0, out=nu)
    return float(nu.sum() / len(nu))


def wass_projections(omega: np.ndarray, nu: np.ndarray, op: Direction) -> float:
    """(1/lN) sum_h max(nu_h - omega_ceil(h/l), 0) on sorted projections (reversed for DX)."""
    omega = np.sort(np.asarray(omega, dtype=float))
    nu = np.sort(np.asarray(nu, dtype=float))
    return wass_sorted(omega, nu, op)


def _states(E: Union[SampleSet, np.ndarray]) -> np.ndarray:
    return E.states if isinstance(E, SampleSet) else np.asarray(E, dtype=float)


def compute_wass(E1: Union[SampleSet, np.ndarray], E2: Union[SampleSet, np.ndarray], op: Direction,
                 rho: PenaltyFunction, time: int) -> float:
    """Estimate the penalty-lifted Wasserstein hemidistance between two sample sets."""
    X1, X2 = _states(E1), _states(E2)
    ell = _ratio(len(X1), len(X2))
    # projections are fresh arrays, so they can be sorted and reused in place
    omega, nu = rho.project(X1, time), rho.project(X2, time)
    omega.sort()
    nu.sort()
    return _wass_inplace(omega, nu, ell, op)


def exact_oracle(omega, nu, op: Direction) -> float:
    """Exact one-sided transport cost between two equal-size empirical measures on R.

    Solves the assignment problem on the full cost matrix, so it does not rely
    on sorted pairing. Used to check the estimator.
    """
    omega = np.asarray(omega, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if omega.shape != nu.shape:
        raise ValueError("oracle needs equal sample sizes")
    if op is Direction.SX:
        cost = np.maximum(nu[None, :] - omega[:, None], 0.0)
    else:
        cost = np.maximum(omega[:, None] - nu[None, :], 0.0)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / len(omega))


def bootstrap_projections(omega: np.ndarray, nu: np.ndarray, op: Direction, m: int,
                          rng: np.random.Generator) -> np.ndarray:
    """m bootstrap replicates of the estimator, resampling both sides with replacement."""
    omega = np.asarray(omega, dtype=float)
    nu = np.asarray(nu, dtype=float)
    ell = _ratio(len(omega), len(nu))
    a = np.sort(omega[rng.integers(0, len(omega), size=(m, len(omega)))], axis=1)
    b = np.sort(nu[rng.integers(0, len(nu), size=(m, len(nu)))], axis=1)
    rep = np.repeat(a, ell, axis=1)
    diff = b - rep if op is Direction.SX else rep - b
    return np.maximum(diff, 0.0).sum(axis=1) / len(nu)


def interval_from_replicates(W: np.ndarray, level: float) -> ConfidenceInterval:
    m = len(W)
    if m < 2:
        raise ValueError("bootstrap needs at least two replicates")
    mean = float(W.sum() / m)
    se = math.sqrt(float(((W - mean) ** 2).sum()) / (m - 1))
    z = z_quantile(level)
    lo = min(max(mean - z * se, 0.0), 1.0)
    hi = min(max(mean + z * se, 0.0), 1.0)
    return ConfidenceInterval(lo, hi, level, mean, se, m)


def bootstrap_ci(E1: Union[SampleSet, np.ndarray], E2: Union[SampleSet, np.ndarray], op: Direction,
                 rho: PenaltyFunction, time: int, m: int = 50, level: float = 0.95,
                 rng: np.random.Generator = None) -> ConfidenceInterval:
    """Normal-theory bootstrap interval mean(W) +- z * SE(W), clamped to [0, 1]."""
    if m < 2:
        raise ValueError("bootstrap needs m >= 2")
    z_quantile(level)
    if rng is None:
        raise ValueError("bootstrap_ci needs an explicit rng")
    X1, X2 = _states(E1), _states(E2)
    W = bootstrap_projections(rho.project(X1, time), rho.project(X2, time), op, m, rng)
    return interval_from_replicates(W, level)
