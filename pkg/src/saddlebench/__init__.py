"""Zero-sum matrix game solvers and conditioning diagnostics."""
from __future__ import annotations

from .errorbound import (Diagnostics, QSystem, StabilityBounds, diagnose, kappa_core,
                         kappa_empirical, q_transform, stability_bounds)
from .exceptions import (InvalidInputError, InvariantViolation, SaddleBenchError, SolverFailureError,
                         StepSizeTooLargeError, UnsupportedSizeError)
from .game import (Game, JointStrategy, Provenance, Trajectory, TrajectoryRecord, duality_gap,
                   gaussian_perturb, identity_game, make_illcond_game, matching_pennies, operator_F,
                   project_simplex, read_game, write_game, zero_game)
from .kernels import BACKEND
from .oracle import Equilibrium, NonDegeneracyCertificate, certify_nondegenerate, solve_exact
from .solvers import SolveResult, SolverConfig, iteration_bound, solve

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Diagnostics", "Equilibrium", "Game", "InvalidInputError", "InvariantViolation",
    "JointStrategy", "NonDegeneracyCertificate", "Provenance", "QSystem", "SaddleBenchError",
    "SolveResult", "SolverConfig", "SolverFailureError", "StabilityBounds", "StepSizeTooLargeError",
    "Trajectory", "TrajectoryRecord", "UnsupportedSizeError", "certify_nondegenerate", "diagnose",
    "duality_gap", "gaussian_perturb", "identity_game", "iteration_bound", "kappa_core",
    "kappa_empirical", "make_illcond_game", "matching_pennies", "operator_F", "project_simplex",
    "q_transform", "read_game", "solve", "solve_exact", "stability_bounds", "write_game", "zero_game",
]
