"""Constrained Anderson acceleration: one extrapolation step and the guarded outer loop."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.errors import ConvergenceError, DivergenceError, DomainError
from src.logging_utils import perf
from src.lsq import DEFAULT_REL_TOL, ExtrapolationWeights, solve_weights
from src.operators import OperatorSpec
from src.rates import RateParams, evaluate_bound, global_bound

LOGGER = logging.getLogger(__name__)

UNCONSTRAINED_BUDGET = 1e9
EXTRAPOLATED = "extrapolated"
FALLBACK = "fallback"


@dataclass(frozen=True)
class CaaConfig:
    """Window ``k`` (k+1 iterates combined), l1 budget ``C`` and subproblem precision.

    ``unconstrained`` replaces the budget by ``UNCONSTRAINED_BUDGET``.
    """

    k: int
    C: float = 1.0
    rel_tol: float = DEFAULT_REL_TOL
    unconstrained: bool = False

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k}")
        if not self.unconstrained and not self.C >= 1.0:
            raise DomainError(f"C must be >= 1, got {self.C}")
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def budget(self) -> float:
        return UNCONSTRAINED_BUDGET if self.unconstrained else float(self.C)


@dataclass(frozen=True)
class StepTrace:
    iterates: Tuple[np.ndarray, ...]
    weights: Optional[ExtrapolationWeights]
    x_e: np.ndarray
    residual_in: float
    residual_out: float
    ratio: float


@dataclass(frozen=True)
class OuterRecord:
    """One outer iteration of the guarded loop.

    ``rate_estimate`` is the one-step rate bound min(rho^k, bound(C) + penalty)
    evaluated at the previous gradient norm; ``bound_grad_norm`` is the running
    product of those bounds times the initial gradient norm.
    """

    index: int
    grad_norm: float
    ratio: float
    guard_taken: str
    coeff_l1: float
    rate_estimate: float
    bound_grad_norm: float


@dataclass(frozen=True)
class RunTrace:
    grad_norm0: float
    records: Tuple[OuterRecord, ...] = field(default_factory=tuple)
    completed: bool = True
    x: Optional[np.ndarray] = None


def residual(F: OperatorSpec, x: np.ndarray) -> float:
    """Return ||F(x) - x||."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(F.apply(x) - x))


def _solve(R: np.ndarray, cfg: CaaConfig) -> ExtrapolationWeights:
    try:
        return solve_weights(R, cfg.budget, cfg.rel_tol)
    except ConvergenceError as exc:
        LOGGER.warning("event=weights_not_converged k=%s C=%s gap=%.3e", cfg.k, cfg.budget, exc.best.gap)
        return exc.best


@perf("caa.caa_step", level=logging.DEBUG)
def caa_step(F: OperatorSpec, x0: np.ndarray, cfg: CaaConfig) -> StepTrace:
    """Run k+1 fixed-point steps from ``x0`` and return the extrapolated point with its residuals.

    Raises:
        ValueError: If ``x0`` is not finite.
        DivergenceError: If an iterate or the extrapolated point is not finite;
            ``trace`` holds the iterates computed so far.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")

    iterates: List[np.ndarray] = [x]
    for step in range(cfg.k + 1):
        nxt = np.asarray(F.apply(iterates[-1]), dtype=float)
        if not np.all(np.isfinite(nxt)):
            raise DivergenceError(f"iterate {step + 1} is not finite", trace=tuple(iterates))
        iterates.append(nxt)

    residual_in = float(np.linalg.norm(iterates[1] - iterates[0]))
    if residual_in == 0.0:
        return StepTrace(tuple(iterates), None, x.copy(), 0.0, 0.0, 0.0)

    R = np.column_stack([iterates[i] - iterates[i + 1] for i in range(cfg.k + 1)])
    weights = _solve(R, cfg)
    x_e = np.column_stack(iterates[: cfg.k + 1]) @ weights.c
    residual_out = residual(F, x_e)
    if not math.isfinite(residual_out):
        raise DivergenceError("extrapolated point is not finite", trace=tuple(iterates))
    return StepTrace(tuple(iterates), weights, x_e, residual_in, residual_out, residual_out / residual_in)


def _bound_base(spec: OperatorSpec, cfg: CaaConfig, M: int) -> Optional[float]:
    if cfg.unconstrained or cfg.k <= 2 or not 0.0 < spec.rho < 1.0:
        return None
    return evaluate_bound(global_bound(RateParams(spec.rho, cfg.k), M), cfg.C)


@perf("caa.guarded_caa")
def guarded_caa(
    f: OperatorSpec,
    x0: np.ndarray,
    cfg: CaaConfig,
    N: int,
    grad_tol: float = 0.0,
    M: int = 1,
) -> RunTrace:
    """Run N outer iterations of guarded CAA on a gradient-step operator.

    Each outer iteration takes k plain gradient steps x^0..x^k, extrapolates
    from the gradients g^0..g^k (R's columns are g^j / L) and keeps whichever
    of x_e and x^k has the smaller gradient norm. The loop stops early at an
    exact zero gradient or once the norm drops to ``grad_tol``.

    Args:
        f: Operator exposing ``gradient`` and a positive ``L``.
        x0: Start point.
        cfg: Window, budget and subproblem precision.
        N: Number of outer iterations.
        grad_tol: Early-stop threshold on the gradient norm.
        M: Number of knots used for the one-step rate bound.

    Raises:
        ValueError: If the operator has no gradient or N < 1.
        DivergenceError: If an inner iterate is not finite; ``trace`` holds the
            RunTrace computed so far.
    """
    if f.gradient is None or not f.L > 0:
        raise ValueError(f"operator {f.name!r} is not a gradient step")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N}")

    x = np.array(x0, dtype=float)
    g = np.asarray(f.gradient(x), dtype=float)
    grad_norm = float(np.linalg.norm(g))
    grad_norm0 = grad_norm
    rho_k = f.rho**cfg.k
    base = _bound_base(f, cfg, M)
    penalty = 3.0 * f.eta / f.L**2 * cfg.k**2 * cfg.C**2
    bound_norm = grad_norm0
    records: List[OuterRecord] = []

    for index in range(1, int(N) + 1):
        if grad_norm == 0.0 or grad_norm <= grad_tol:
            break

        points = [x]
        grads = [g]
        for _ in range(cfg.k):
            nxt = points[-1] - grads[-1] / f.L
            nxt_grad = np.asarray(f.gradient(nxt), dtype=float)
            if not (np.all(np.isfinite(nxt)) and np.all(np.isfinite(nxt_grad))):
                trace = RunTrace(grad_norm0, tuple(records), completed=False, x=x)
                raise DivergenceError(f"inner iterate diverged at outer iteration {index}", trace=trace)
            points.append(nxt)
            grads.append(nxt_grad)

        R = np.column_stack(grads) / f.L
        weights = _solve(R, cfg)
        x_e = np.column_stack(points) @ weights.c
        g_e = np.asarray(f.gradient(x_e), dtype=float)
        norm_e = float(np.linalg.norm(g_e))
        norm_k = float(np.linalg.norm(grads[-1]))

        if math.isfinite(norm_e) and norm_e <= norm_k:
            x, g, new_norm, taken = x_e, g_e, norm_e, EXTRAPOLATED
        else:
            x, g, new_norm, taken = points[-1], grads[-1], norm_k, FALLBACK

        rate = rho_k if base is None else min(rho_k, base + penalty * grad_norm)
        bound_norm *= rate
        records.append(
            OuterRecord(
                index=index,
                grad_norm=new_norm,
                ratio=new_norm / grad_norm,
                guard_taken=taken,
                coeff_l1=weights.l1,
                rate_estimate=rate,
                bound_grad_norm=bound_norm,
            )
        )
        LOGGER.debug(
            "event=outer index=%s grad_norm=%.6e ratio=%.6e guard=%s l1=%.3e",
            index,
            new_norm,
            new_norm / grad_norm,
            taken,
            weights.l1,
        )
        grad_norm = new_norm

    return RunTrace(grad_norm0, tuple(records), completed=True, x=x)


__all__ = [
    "CaaConfig",
    "EXTRAPOLATED",
    "FALLBACK",
    "OuterRecord",
    "RunTrace",
    "StepTrace",
    "UNCONSTRAINED_BUDGET",
    "caa_step",
    "guarded_caa",
    "residual",
]
