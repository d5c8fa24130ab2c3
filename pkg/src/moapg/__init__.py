"""Accelerated proximal gradient methods for composite multiobjective optimization."""

from .core import (
    NonsmoothTerm,
    ObjectiveVector,
    Problem,
    QuadraticObjective,
    SmoothObjective,
    SolverConfig,
    evaluate_F,
    lipschitz_bound,
    problem_from_dict,
    validate_config,
)
from .prox import WeightedNonsmooth, moreau_envelope, prox
from .subproblem import SubproblemInput, SubproblemSolution, solve as solve_subproblem
from .solver import RunTrace, run, run_baseline
from .merit import ReferenceFront, RateCertificate, certify_rate, u0_lower_bound
from .bench import BenchmarkSpec, FrontResult, generate_front, make_problem, nondominated_filter

__version__ = "0.1.0"

__all__ = [
    "BenchmarkSpec",
    "FrontResult",
    "NonsmoothTerm",
    "ObjectiveVector",
    "Problem",
    "QuadraticObjective",
    "RateCertificate",
    "ReferenceFront",
    "RunTrace",
    "SmoothObjective",
    "SolverConfig",
    "SubproblemInput",
    "SubproblemSolution",
    "WeightedNonsmooth",
    "certify_rate",
    "evaluate_F",
    "generate_front",
    "lipschitz_bound",
    "make_problem",
    "moreau_envelope",
    "nondominated_filter",
    "problem_from_dict",
    "prox",
    "run",
    "run_baseline",
    "solve_subproblem",
    "u0_lower_bound",
    "validate_config",
]
