"""Similarity solutions of the two-phase melting/evaporation moving-boundary
problem under q0/sqrt(t) surface heating, with a finite-difference verifier.

Pipeline: a :class:`MaterialModel` is reduced through two Kirchhoff
substitutions to a :class:`TransformedProblem`, the matching transcendental
front system is solved for the front constants, closed-form profiles are
fitted and validated, and (optionally) an independent moving-boundary
finite-difference simulation cross-checks the result.
"""

from .material import (CONST, EXP, INV_SQUARE, CoefficientFn, MaterialModel,
                       PhaseMaps, TransformedProblem, UnsupportedDiffusivity,
                       build_transformed_problem, kirchhoff_maps)
from .profiles import (ErfProfile, ParametricExpProfile,
                       ParametricPowerProfile, SimilaritySolution,
                       invert_omega, ode_residual, reconstruct_field,
                       solve_implicit_g)
from .fronts import (EX1, EX2, EX3, FrontSolveResult, FrontSolverError,
                     FrontSystem, UnsupportedCombination, assemble_solution,
                     boundary_residuals, bracket_scan, front_system,
                     solve_fronts)
from .oracle import (FrontCollisionError, OracleConfig, OracleState,
                     OracleTrajectory, compare, init_from_similarity, run,
                     step)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CONST", "INV_SQUARE", "EXP",
    "CoefficientFn", "MaterialModel", "PhaseMaps", "TransformedProblem",
    "UnsupportedDiffusivity", "build_transformed_problem", "kirchhoff_maps",
    "ErfProfile", "ParametricPowerProfile", "ParametricExpProfile",
    "SimilaritySolution", "invert_omega", "ode_residual",
    "reconstruct_field", "solve_implicit_g",
    "EX1", "EX2", "EX3", "FrontSystem", "FrontSolveResult",
    "FrontSolverError", "UnsupportedCombination", "front_system",
    "bracket_scan", "solve_fronts", "assemble_solution",
    "boundary_residuals",
    "OracleConfig", "OracleState", "OracleTrajectory",
    "FrontCollisionError", "init_from_similarity", "step", "run", "compare",
]
