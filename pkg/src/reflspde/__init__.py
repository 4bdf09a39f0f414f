"""Finite-difference solvers for elliptic SPDEs with two reflecting walls."""

from .grid import Grid, build_grid
from .green import discrete_green, green_holder_constant, green_sup_l2
from .coefficients import CoefficientPair, Diffusion, Drift
from .noise import derive_seed, sample_white_noise, stochastic_convolution
from .obstacle import (
    PenaltyParams,
    SolutionTriplet,
    WallPair,
    check_solution,
    extract_measures,
    solve_active_set_enum,
    solve_penalized,
    solve_psor,
    solve_single_wall,
    solve_two_wall,
)
from .picard import ContractionInputs, contraction_condition, picard_solve

__version__ = "0.1.0"

__all__ = [
    "CoefficientPair", "ContractionInputs", "Diffusion", "Drift", "Grid", "PenaltyParams",
    "SolutionTriplet", "WallPair", "build_grid", "check_solution", "contraction_condition",
    "derive_seed", "discrete_green", "extract_measures", "green_holder_constant", "green_sup_l2",
    "picard_solve", "sample_white_noise", "solve_active_set_enum", "solve_penalized", "solve_psor",
    "solve_single_wall", "solve_two_wall", "stochastic_convolution",
]
