"""Inexact limited memory bundle method for nonsmooth, possibly noisy, optimization."""

from .aggregation import AggregateState, SimplexQP, aggregate, build_qp, solve_simplex_qp
from .bundle import (BundleElement, LinearizationData, convexification_parameter,
                     linearization_error, make_bundle_element)
from .lmqn import BFGS, SR1, CorrectionStore, apply_bfgs, apply_sr1, try_push_pair
from .oracle import NOISE_KINDS, NoiseSpec, NoisyOracle, OracleError, evaluate, wrap_noise
from .problems import F3_BEST, PROBLEM_IDS, ProblemInstance, instantiate, subgradient_check
from .solver import (InvariantViolation, SolveReport, SolverConfig, descent_test, minimize,
                     stopping_value)

__version__ = "0.1.0"

__all__ = [
    "AggregateState", "SimplexQP", "aggregate", "build_qp", "solve_simplex_qp",
    "BundleElement", "LinearizationData", "convexification_parameter", "linearization_error",
    "make_bundle_element", "BFGS", "SR1", "CorrectionStore", "apply_bfgs", "apply_sr1",
    "try_push_pair", "NOISE_KINDS", "NoiseSpec", "NoisyOracle", "OracleError", "evaluate",
    "wrap_noise", "F3_BEST", "PROBLEM_IDS", "ProblemInstance", "instantiate",
    "subgradient_check", "InvariantViolation", "SolveReport", "SolverConfig", "descent_test",
    "minimize", "stopping_value",
]
