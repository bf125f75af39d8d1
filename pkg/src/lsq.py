"""Extrapolation weights: min ||R c|| subject to sum(c) = 1 and ||c||_1 <= C.

The feasible set is a polytope whose vertices are known in closed form:
((C+1)/2) e_i - ((C-1)/2) e_j for i != j, or the unit vectors when C = 1.
The solver first tries the equality-only least-squares solution (optimal
whenever it already satisfies the budget) and otherwise runs an away-step
conditional-gradient loop on 0.5 ||R c||^2 whose iterate is kept as a convex
combination of vertices. After every step the weights are re-optimized over
the affine hull of the active vertices, dropping vertices whose weight would
turn negative.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.errors import ConvergenceError
from src.logging_utils import perf

LOGGER = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-8
MAX_COLUMNS = 64
_DROP_WEIGHT = 1e-15

Atom = Tuple[int, int]


@dataclass(frozen=True)
class ExtrapolationWeights:
    """Solution of the weight subproblem.

    Attributes:
        c: Weights, one per column of R.
        l1: ||c||_1.
        residual_norm: ||R c||, recomputed from ``c``.
        gap: Upper bound on residual_norm minus the optimal residual norm.
        iterations: Conditional-gradient iterations (0 for the closed-form exits).
        converged: False only on the best-so-far attached to a ConvergenceError.
    """

    c: np.ndarray
    l1: float
    residual_norm: float
    gap: float
    iterations: int = 0
    converged: bool = True


def _vertex(atom: Atom, C: float, m: int) -> np.ndarray:
    i, j = atom
    vertex = np.zeros(m)
    if i == j:
        vertex[i] = 1.0
        return vertex
    vertex[i] = (C + 1.0) / 2.0
    vertex[j] = -(C - 1.0) / 2.0
    return vertex


def _oracle_atom(gradient: np.ndarray, C: float) -> Atom:
    i = int(np.argmin(gradient))
    j = int(np.argmax(gradient))
    if C == 1.0 or i == j:
        return (i, i)
    return (i, j)


def linear_minimization(gradient: np.ndarray, C: float) -> np.ndarray:
    """Return the vertex of {sum(c) = 1, ||c||_1 <= C} minimizing <gradient, c>.

    Ties resolve to the lowest index; a constant gradient returns e_0.
    """
    if C < 1.0:
        raise ValueError(f"C must be >= 1, got {C}")
    gradient = np.asarray(gradient, dtype=float)
    return _vertex(_oracle_atom(gradient, C), C, gradient.size)


def _certificate(fw_gap: float, residual_norm: float) -> float:
    # 0.5 ||Rc||^2 - 0.5 opt^2 <= fw_gap, converted to a bound on ||Rc|| - opt.
    if fw_gap <= 0.0:
        return 0.0
    bound = math.sqrt(2.0 * fw_gap)
    if residual_norm > 0.0:
        bound = min(bound, 2.0 * fw_gap / residual_norm)
    return bound


def _affine_minimizer(M: np.ndarray) -> np.ndarray:
    """Return mu with sum(mu) = 1 minimizing ||M mu||."""
    base = M[:, 0]
    directions = M[:, 1:] - base[:, np.newaxis]
    z = np.linalg.lstsq(directions, -base, rcond=None)[0]
    return np.concatenate([[1.0 - z.sum()], z])


def _equality_solution(R: np.ndarray) -> np.ndarray:
    return _affine_minimizer(R)


def _build(R: np.ndarray, c: np.ndarray, gap: float, iterations: int, converged: bool) -> ExtrapolationWeights:
    return ExtrapolationWeights(
        c=c,
        l1=float(np.sum(np.abs(c))),
        residual_norm=float(np.linalg.norm(R @ c)),
        gap=float(gap),
        iterations=iterations,
        converged=converged,
    )


class _ActiveSet:
    """Vertices with positive barycentric weights describing the current iterate."""

    def __init__(self, C: float, m: int) -> None:
        self.C = C
        self.m = m
        self.atoms: List[Atom] = []
        self.weights = np.zeros(0)
        self._cache: Dict[Atom, np.ndarray] = {}

    def vertex(self, atom: Atom) -> np.ndarray:
        if atom not in self._cache:
            self._cache[atom] = _vertex(atom, self.C, self.m)
        return self._cache[atom]

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.vertex(atom) for atom in self.atoms])

    def point(self) -> np.ndarray:
        return self.matrix() @ self.weights

    def add(self, atom: Atom, weight: float) -> None:
        if atom in self.atoms:
            self.weights[self.atoms.index(atom)] += weight
        else:
            self.atoms.append(atom)
            self.weights = np.append(self.weights, weight)

    def prune(self) -> None:
        keep = self.weights > _DROP_WEIGHT
        if not np.any(keep):
            keep[int(np.argmax(self.weights))] = True
        self.atoms = [atom for atom, flag in zip(self.atoms, keep) if flag]
        self.weights = self.weights[keep]
        self.weights = self.weights / self.weights.sum()

    def correct(self, R: np.ndarray) -> None:
        """Move to the minimizer over the convex hull of the active vertices when it is reachable.

        Each pass targets the affine-hull minimizer and stops at the first
        weight that hits zero, dropping that vertex.
        """
        for _ in range(len(self.atoms)):
            if len(self.atoms) < 2:
                return
            M = R @ self.matrix()
            mu = _affine_minimizer(M)
            if np.linalg.norm(M @ mu) > np.linalg.norm(M @ self.weights):
                return
            if mu.min() >= 0.0:
                self.weights = mu / mu.sum()
                self.prune()
                return
            negative = np.flatnonzero(mu < 0.0)
            ratios = self.weights[negative] / (self.weights[negative] - mu[negative])
            blocking = int(negative[int(np.argmin(ratios))])
            theta = float(ratios.min())
            self.weights = self.weights + theta * (mu - self.weights)
            self.weights[blocking] = 0.0
            self.prune()


def _default_iteration_cap(m: int, rel_tol: float) -> int:
    return int(10 * m * m * max(1.0, math.log10(1.0 / rel_tol)))


@perf("lsq.solve_weights", level=logging.DEBUG)
def solve_weights(
    R: np.ndarray,
    C: float,
    rel_tol: float = DEFAULT_REL_TOL,
    max_iterations: Optional[int] = None,
) -> ExtrapolationWeights:
    """Solve min ||R c|| s.t. sum(c) = 1, ||c||_1 <= C.

    The returned weights satisfy ||R c|| <= optimum + rel_tol * ||R e_0||.

    Args:
        R: Residual matrix with one column per iterate difference.
        C: l1 budget, at least 1.
        rel_tol: Precision relative to the first column norm.
        max_iterations: Cap on conditional-gradient iterations.

    Raises:
        ValueError: If R is not a finite 2-D array with 2 to 64 columns, C < 1
            or rel_tol <= 0.
        ConvergenceError: If the cap is hit; ``best`` holds feasible weights.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2:
        raise ValueError(f"R must be a 2-D array, got shape {R.shape}")
    if not np.all(np.isfinite(R)):
        raise ValueError("R contains non-finite entries")
    m = R.shape[1]
    if not 2 <= m <= MAX_COLUMNS:
        raise ValueError(f"R must have between 2 and {MAX_COLUMNS} columns, got {m}")
    if not C >= 1.0:
        raise ValueError(f"C must be >= 1, got {C}")
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")

    column_norms = np.linalg.norm(R, axis=0)
    zero_columns = np.flatnonzero(column_norms == 0.0)
    if zero_columns.size:
        c = np.zeros(m)
        c[int(zero_columns[0])] = 1.0
        return _build(R, c, 0.0, 0, True)

    c_eq = _equality_solution(R)
    if np.sum(np.abs(c_eq)) <= C:
        return _build(R, c_eq, 0.0, 0, True)

    target = rel_tol * float(column_norms[0])
    cap = max_iterations if max_iterations is not None else _default_iteration_cap(m, rel_tol)
    active = _ActiveSet(C, m)
    active.add((0, 0), 1.0)
    bound = math.inf

    for iteration in range(1, cap + 1):
        c = active.point()
        residual = R @ c
        gradient = R.T @ residual
        fw_atom = _oracle_atom(gradient, C)
        fw_vertex = active.vertex(fw_atom)
        fw_gap = float(gradient @ (c - fw_vertex))
        bound = _certificate(fw_gap, float(np.linalg.norm(residual)))
        if bound <= target:
            LOGGER.debug("event=weights_converged iterations=%s gap=%.3e active=%s", iteration, bound, active.atoms)
            return _build(R, c, bound, iteration, True)

        scores = gradient @ active.matrix()
        away_index = int(np.argmax(scores))
        away_gap = float(scores[away_index] - gradient @ c)
        toward = fw_gap >= away_gap or len(active.atoms) == 1
        if toward:
            direction = fw_vertex - c
            max_step = 1.0
        else:
            away_weight = float(active.weights[away_index])
            direction = c - active.vertex(active.atoms[away_index])
            max_step = away_weight / (1.0 - away_weight)

        projected = R @ direction
        curvature = float(projected @ projected)
        if curvature <= 0.0:
            step = max_step
        else:
            step = min(max_step, max(0.0, -float(residual @ projected) / curvature))

        if toward:
            active.weights = active.weights * (1.0 - step)
            active.add(fw_atom, step)
        else:
            active.weights = active.weights * (1.0 + step)
            active.weights[away_index] -= step
            if step >= max_step:
                active.weights[away_index] = 0.0
        active.prune()
        active.correct(R)

    best = _build(R, active.point(), bound, cap, False)
    LOGGER.warning("event=weights_cap iterations=%s gap=%.3e target=%.3e", cap, bound, target)
    raise ConvergenceError(f"weight solver did not converge within {cap} iterations", best=best, iterations=cap)


__all__ = [
    "DEFAULT_REL_TOL",
    "ExtrapolationWeights",
    "linear_minimization",
    "solve_weights",
]
