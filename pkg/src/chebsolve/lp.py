"""Thin wrapper over SciPy's HiGHS linear programming backend.

The minimax oracles only ever build small dense LPs (2(k+1)+1 variables, a
few hundred rows), so the wrapper keeps everything dense and maps HiGHS status
codes onto the package exceptions.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from src.errors import ConvergenceError, InfeasibleError, UnboundedError
from src.logging_utils import perf

LOGGER = logging.getLogger(__name__)

LP_TOLERANCE = 1e-10

Bounds = Union[Tuple[Optional[float], Optional[float]], Sequence[Tuple[Optional[float], Optional[float]]]]


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    value: float
    iterations: int


@perf("chebsolve.solve_lp", level=logging.DEBUG)
def solve_lp(
    objective: np.ndarray,
    A_ub: Optional[np.ndarray] = None,
    b_ub: Optional[np.ndarray] = None,
    A_eq: Optional[np.ndarray] = None,
    b_eq: Optional[np.ndarray] = None,
    bounds: Bounds = (0, None),
) -> LpSolution:
    """Minimize ``objective @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and ``bounds``.

    Raises:
        InfeasibleError: If the feasible set is empty.
        UnboundedError: If the objective is unbounded below.
        ConvergenceError: If HiGHS stops on its iteration limit or numerical trouble.
    """
    result = linprog(
        np.asarray(objective, dtype=float),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": LP_TOLERANCE,
            "dual_feasibility_tolerance": LP_TOLERANCE,
        },
    )
    iterations = int(getattr(result, "nit", 0) or 0)
    if result.status == 2:
        raise InfeasibleError(f"linear program is infeasible: {result.message}")
    if result.status == 3:
        raise UnboundedError(f"linear program is unbounded: {result.message}")
    if result.status != 0:
        LOGGER.warning("event=lp_failure status=%s message=%s", result.status, result.message)
        raise ConvergenceError(f"linear program did not finish: {result.message}", iterations=iterations)
    return LpSolution(x=np.asarray(result.x, dtype=float), value=float(result.fun), iterations=iterations)


__all__ = ["LP_TOLERANCE", "LpSolution", "solve_lp"]
