"""Numerical laboratory for scalar retarded functional differential equations.

The package checks the hypotheses of the existence theorems for semi-bounded
solutions, constructs such solutions by shooting on truncated intervals and a
limit over the truncation point, and verifies the qualitative properties of
the computed trajectories.
"""
from .analysis import VerifyThresholds, property_report
from .conditions import admissible_c_interval, lambda_fixed_point, theorem_verdict
from .core import CoeffFunction, DiscreteKernel, Equation, ModelError, Trajectory
from .models import make_delay_eq, make_deviating, make_logistic, make_power_monostable, make_wavefront
from .scenario import Scenario, ScenarioError, load_scenario
from .solver import SolveConfig, SolveResult, extend_forward, integrate_forward, limit_scheme

__all__ = [
    "CoeffFunction", "DiscreteKernel", "Equation", "ModelError", "Scenario", "ScenarioError",
    "SolveConfig", "SolveResult", "Trajectory", "VerifyThresholds", "admissible_c_interval",
    "extend_forward", "integrate_forward", "lambda_fixed_point", "limit_scheme", "load_scenario",
    "make_delay_eq", "make_deviating", "make_logistic", "make_power_monostable", "make_wavefront",
    "property_report", "theorem_verdict",
]
