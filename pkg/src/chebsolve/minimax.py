"""Constrained Chebyshev oracles: discretized LP plus single-point exchange.

The constrained problem

    min_p max_{x in [0, rho]} |p(x)|   s.t.  deg p <= k, p(1) = 1, ||p||_1 <= C

becomes an LP once p = a - b with a, b >= 0 and the max is taken over a finite
grid. Each round solves the LP, locates the true maximum of |p| off the grid
and, if it exceeds the LP level by more than ``tol``, adds that point to the
grid. The projection variant measures |p - p*| instead, p* being the optimal
unconstrained polynomial.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.chebsolve.lp import solve_lp
from src.errors import ConvergenceError, DomainError, InfeasibleError
from src.logging_utils import perf
from src.polynomials import Polynomial, max_abs_on_interval, rescaled_cheb

LOGGER = logging.getLogger(__name__)

MODES = ("direct", "projection")
MAX_DEGREE = 16
GRID_POINTS_PER_COEFFICIENT = 32
DEFAULT_TOL = 1e-6
DEFAULT_MAX_EXCHANGES = 50


@dataclass(frozen=True)
class MinimaxProblem:
    """One instance of the constrained Chebyshev problem.

    ``mode`` is ``direct`` for the constrained problem itself and
    ``projection`` for the closest feasible polynomial to p* in sup norm.
    """

    rho: float
    k: int
    C: float
    mode: str = "direct"

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (0, 1), got {self.rho}")
        if int(self.k) != self.k or not 1 <= self.k <= MAX_DEGREE:
            raise DomainError(f"k must be an integer in [1, {MAX_DEGREE}], got {self.k}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not math.isfinite(self.C):
            raise ValueError(f"C must be finite, got {self.C}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class MinimaxSolution:
    """Oracle output.

    ``value`` is the LP level (a lower bound on the true optimum) in direct
    mode and max |q| on [0, rho] in projection mode; ``certified_gap`` bounds
    how far the off-grid maximum of the LP objective exceeds the LP level.
    """

    poly: Polynomial
    value: float
    certified_gap: float
    iterations: int
    grid_size: int


@dataclass(frozen=True)
class CurvePoint:
    C: float
    solution: MinimaxSolution
    converged: bool


def chebyshev_grid(rho: float, size: int) -> np.ndarray:
    """Return ``size`` Chebyshev extreme points on [0, rho], endpoints included."""
    j = np.arange(size)
    return rho * (1.0 - np.cos(j * math.pi / (size - 1))) / 2.0


def _constraint_rows(grid: np.ndarray, k: int, reference: Optional[np.ndarray]):
    m = k + 1
    vander = np.vander(grid, m, increasing=True)
    ones = np.ones((grid.size, 1))
    upper = np.hstack([vander, -vander, -ones])
    lower = np.hstack([-vander, vander, -ones])
    shift = np.zeros(grid.size) if reference is None else reference
    A_ub = np.vstack([upper, lower])
    b_ub = np.concatenate([shift, -shift])
    return A_ub, b_ub


def _solve_on_grid(problem: MinimaxProblem, grid: np.ndarray, reference: Optional[Polynomial]):
    m = problem.k + 1
    ref_values = None if reference is None else np.asarray(reference(grid), dtype=float)
    A_grid, b_grid = _constraint_rows(grid, problem.k, ref_values)
    budget_row = np.concatenate([np.ones(2 * m), [0.0]])
    A_ub = np.vstack([A_grid, budget_row])
    b_ub = np.concatenate([b_grid, [problem.C]])
    A_eq = np.concatenate([np.ones(m), -np.ones(m), [0.0]])[np.newaxis, :]
    b_eq = np.array([1.0])
    objective = np.zeros(2 * m + 1)
    objective[-1] = 1.0

    lp = solve_lp(objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None))
    coeffs = lp.x[:m] - lp.x[m : 2 * m]
    return Polynomial(coeffs), float(lp.x[-1])


def _exchange(problem: MinimaxProblem, tol: float, max_exchanges: int) -> MinimaxSolution:
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if problem.C < 1.0:
        raise InfeasibleError(f"no degree-{problem.k} polynomial with p(1) = 1 has l1 norm {problem.C} < 1")

    reference = rescaled_cheb(problem.rho, 0.0, problem.k) if problem.mode == "projection" else None
    grid = chebyshev_grid(problem.rho, GRID_POINTS_PER_COEFFICIENT * (problem.k + 1))
    best: Optional[MinimaxSolution] = None

    for iteration in range(1, max_exchanges + 1):
        poly, level = _solve_on_grid(problem, grid, reference)
        target = poly if reference is None else poly - reference
        peak, peak_x = max_abs_on_interval(target, 0.0, problem.rho)
        gap = max(0.0, peak - level)
        value = level if reference is None else max_abs_on_interval(poly, 0.0, problem.rho)[0]
        solution = MinimaxSolution(
            poly=poly, value=value, certified_gap=gap, iterations=iteration, grid_size=int(grid.size)
        )
        if best is None or gap < best.certified_gap:
            best = solution
        LOGGER.debug(
            "event=exchange iteration=%s level=%.17g peak=%.17g gap=%.3e grid=%s",
            iteration,
            level,
            peak,
            gap,
            grid.size,
        )
        if peak <= level + tol:
            return solution
        grid = np.sort(np.append(grid, peak_x))

    LOGGER.warning(
        "event=exchange_cap rho=%s k=%s C=%s mode=%s gap=%.3e",
        problem.rho,
        problem.k,
        problem.C,
        problem.mode,
        best.certified_gap,
    )
    raise ConvergenceError(
        f"exchange loop did not reach tol={tol} within {max_exchanges} iterations",
        best=best,
        iterations=max_exchanges,
    )


@perf("chebsolve.solve_ctr_cheb", level=logging.DEBUG)
def solve_ctr_cheb(
    problem: MinimaxProblem, tol: float = DEFAULT_TOL, max_exchanges: int = DEFAULT_MAX_EXCHANGES
) -> MinimaxSolution:
    """Solve the constrained Chebyshev problem to within ``tol`` of its off-grid maximum.

    Raises:
        InfeasibleError: If C < 1.
        ConvergenceError: If the exchange loop exceeds ``max_exchanges``; ``best``
            holds the solution with the smallest gap.
    """
    if problem.mode != "direct":
        problem = MinimaxProblem(problem.rho, problem.k, problem.C, "direct")
    return _exchange(problem, tol, max_exchanges)


@perf("chebsolve.solve_projection_bound", level=logging.DEBUG)
def solve_projection_bound(
    problem: MinimaxProblem, tol: float = DEFAULT_TOL, max_exchanges: int = DEFAULT_MAX_EXCHANGES
) -> MinimaxSolution:
    """Return the feasible q closest to p* in sup norm on [0, rho]; ``value`` is max |q| there."""
    if problem.mode != "projection":
        problem = MinimaxProblem(problem.rho, problem.k, problem.C, "projection")
    return _exchange(problem, tol, max_exchanges)


def _solve_point(problem: MinimaxProblem, tol: float) -> CurvePoint:
    solver = solve_projection_bound if problem.mode == "projection" else solve_ctr_cheb
    try:
        return CurvePoint(C=problem.C, solution=solver(problem, tol), converged=True)
    except ConvergenceError as exc:
        return CurvePoint(C=problem.C, solution=exc.best, converged=False)


def solve_ctr_cheb_curve(
    rho: float,
    k: int,
    Cs: Sequence[float],
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    mode: str = "direct",
) -> List[CurvePoint]:
    """Solve one problem per budget in ``Cs`` and return the points in input order.

    Non-converged points carry the best solution found and ``converged=False``.
    """
    problems = [MinimaxProblem(rho, k, float(C), mode) for C in Cs]
    if workers <= 1 or len(problems) <= 1:
        return [_solve_point(problem, tol) for problem in problems]

    points: List[Optional[CurvePoint]] = [None] * len(problems)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_map = {executor.submit(_solve_point, problem, tol): index for index, problem in enumerate(problems)}
        for fut in as_completed(future_map):
            points[future_map[fut]] = fut.result()
    return points  # type: ignore[return-value]


__all__ = [
    "CurvePoint",
    "MODES",
    "MinimaxProblem",
    "MinimaxSolution",
    "chebyshev_grid",
    "solve_ctr_cheb",
    "solve_ctr_cheb_curve",
    "solve_projection_bound",
]
