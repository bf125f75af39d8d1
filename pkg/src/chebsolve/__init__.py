"""Numerical oracles for the constrained Chebyshev problem."""

from .lp import LpSolution, solve_lp
from .minimax import (
    CurvePoint,
    MinimaxProblem,
    MinimaxSolution,
    chebyshev_grid,
    solve_ctr_cheb,
    solve_ctr_cheb_curve,
    solve_projection_bound,
)

__all__ = [
    "CurvePoint",
    "LpSolution",
    "MinimaxProblem",
    "MinimaxSolution",
    "chebyshev_grid",
    "solve_ctr_cheb",
    "solve_ctr_cheb_curve",
    "solve_lp",
    "solve_projection_bound",
]
