"""Statistical model checking of robustness properties of stochastic systems."""
from __future__ import annotations

from .checker import CheckConfig, Checker, eval_bool, omega, perturbed_suffix, sat
from .distance import ConfidenceInterval, Direction, bootstrap_ci, compute_wass, exact_oracle
from .expressions import eval_expr, eval_expr_ci, hdepth
from .logic import ThreeValued, horizon
from .model import DataSpace, DataState, PenaltyFunction, eval_penalty, validate_state
from .perturbation import effect, next_, psem_at, sim_per
from .sim import EmpiricalEvolutionSequence, SampleSet, sim_step, simulate

__version__ = "0.1.0"

__all__ = [
    "CheckConfig", "Checker", "ConfidenceInterval", "DataSpace", "DataState", "Direction",
    "EmpiricalEvolutionSequence", "PenaltyFunction", "SampleSet", "ThreeValued", "bootstrap_ci",
    "compute_wass", "effect", "eval_bool", "eval_expr", "eval_expr_ci", "eval_penalty", "exact_oracle",
    "hdepth", "horizon", "next_", "omega", "perturbed_suffix", "psem_at", "sat", "sim_per", "sim_step",
    "simulate", "validate_state",
]
