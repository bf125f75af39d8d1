"""Closed-form convergence rates, l1 budgets and thresholds for constrained Anderson acceleration.

Notation follows the rest of the package: ``rho`` is the contraction factor of
the fixed-point map, ``k`` the extrapolation window (k+1 iterates), ``C`` the
l1 budget on the extrapolation weights.

Quantities:
    rho_star      optimal unconstrained Chebyshev rate 2 beta^k / (1 + beta^2k)
    c_star        l1 norm of the optimal polynomial; the budget above which the constraint is inactive
    eps_tilde     largest eps for which p_eps has alternating coefficient signs
    rho_eps       minimax value of p_eps on [-eps, rho]
    c1_rho1       budget/rate pair of p_rho(x) = rho_1 T_k(x / rho)
    global_bound  knots of the piecewise-linear upper bound on the constrained rate
    hat_rho*      the bound plus the nonlinear penalty 3 alpha k C (or its gradient-step form)
    *_thresholds  perturbation levels below which acceleration is guaranteed
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from src.errors import DomainError
from src.polynomials import l1_norm, rescaled_cheb

LOGGER = logging.getLogger(__name__)

_BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class RateParams:
    """Contraction factor ``rho`` in (0, 1) and window ``k`` >= 1."""

    rho: float
    k: int

    def __post_init__(self) -> None:
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (0, 1), got {self.rho}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def rho_k(self) -> float:
        return self.rho**self.k


@dataclass(frozen=True)
class BoundKnots:
    """Nodes (C_i, rho_i) of the piecewise-linear bound, sorted by C.

    ``indices`` keeps the original labels (-1 for C = 1, 0 for the small-C
    corner, 1..M for the rescaled Chebyshev samples, M+1 for C*).
    """

    knots: Tuple[Tuple[float, float], ...]
    indices: Tuple[int, ...]
    M: int
    rho_star: float

    @property
    def c_star(self) -> float:
        return self.knots[-1][0]


def _beta(s: float) -> float:
    root = math.sqrt(max(0.0, 1.0 - s))
    return (1.0 - root) / (1.0 + root)


def _rate(beta: float, k: int) -> float:
    return 2.0 * beta**k / (1.0 + beta ** (2 * k))


def _check_rho_k(rho: float, k: int) -> None:
    RateParams(rho, k)


def rho_star(params: RateParams) -> float:
    """Return rho* = 2 beta^k / (1 + beta^2k), beta = (1 - sqrt(1-rho)) / (1 + sqrt(1-rho))."""
    return _rate(_beta(params.rho), params.k)


def eps_tilde(params: RateParams) -> float:
    """Return the largest eps for which the smallest root of p_eps is still >= 0."""
    node = math.cos((2 * params.k - 1) * math.pi / (2 * params.k))
    return params.rho * (1.0 + node) / (1.0 - node)


def rho_eps(rho: float, eps: float, k: int) -> float:
    """Return the minimax value of p_eps on [-eps, rho]."""
    _check_rho_k(rho, k)
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    return _rate(_beta((rho + eps) / (1.0 + eps)), k)


def p_eps_l1(rho: float, eps: float, k: int) -> float:
    """Return ||p_eps||_1 through the alternating-sign identity ||p_eps||_1 = |p_eps(-1)|.

    Raises:
        DomainError: If ``eps`` exceeds eps_tilde(rho, k), where the coefficients
            of p_eps no longer alternate and the identity is not available.
    """
    params = RateParams(rho, k)
    limit = eps_tilde(params)
    if eps < 0 or eps > limit * (1.0 + _BOUNDARY_SLACK):
        raise DomainError(f"eps={eps} outside [0, eps_tilde={limit}] for rho={rho}, k={k}")
    eps = min(eps, limit)
    span = rho + eps
    centre = 2.0 + rho - eps
    root = 2.0 * math.sqrt((1.0 + rho) * (1.0 - eps))
    return rho_eps(rho, eps, k) / 2.0 * (((centre - root) / span) ** k + ((centre + root) / span) ** k)


def c_star(params: RateParams) -> float:
    """Return C* = ||p*||_1, the budget beyond which the l1 constraint is inactive."""
    rho, k = params.rho, params.k
    root = 2.0 * math.sqrt(1.0 + rho)
    return rho_star(params) / 2.0 * (((2.0 + rho - root) / rho) ** k + ((2.0 + rho + root) / rho) ** k)


def c1_rho1(params: RateParams) -> Tuple[float, float]:
    """Return (C_1, rho_1) for p_rho(x) = rho_1 T_k(x / rho).

    The coefficients of T_k(x / rho) share the parity of k, so their l1 norm is
    |T_k(i / rho)|, which gives the closed form for C_1.
    """
    rho, k = params.rho, params.k
    plus, minus = math.sqrt(1.0 + rho), math.sqrt(1.0 - rho)
    rho1 = _rate((plus - minus) / (plus + minus), k)
    root = math.sqrt(1.0 + rho * rho)
    c1 = rho1 / 2.0 * abs(((1.0 - root) / rho) ** k + ((1.0 + root) / rho) ** k)
    return c1, rho1


def c_zero(params: RateParams) -> float:
    """Return (2 + rho^k) / (2 - rho^k), the end of the small-C closed-form range."""
    return (2.0 + params.rho_k) / (2.0 - params.rho_k)


def rho_zero(params: RateParams) -> float:
    """Return rho^k / (2 - rho^k), the constrained rate at c_zero."""
    return params.rho_k / (2.0 - params.rho_k)


def tilde_rho_small_C(params: RateParams, C: float) -> float:
    """Return the exact constrained rate ((C+1)/2) rho^k - (C-1)/2 for 1 <= C <= c_zero."""
    upper = c_zero(params)
    if C < 1.0 or C > upper * (1.0 + _BOUNDARY_SLACK):
        raise DomainError(f"C={C} outside [1, {upper}] where the small-C closed form holds")
    return (C + 1.0) / 2.0 * params.rho_k - (C - 1.0) / 2.0


def lemma1_chord(params: RateParams, C: float) -> float:
    """Return the coarse convexity chord between (1, rho^k) and (C*, rho*), flat at rho* beyond C*."""
    if C < 1.0:
        raise DomainError(f"C must be >= 1, got {C}")
    budget, floor = c_star(params), rho_star(params)
    if C >= budget:
        return floor
    return ((budget - C) * params.rho_k + (C - 1.0) * floor) / (budget - 1.0)


@lru_cache(maxsize=256)
def _knots(rho: float, k: int, M: int) -> BoundKnots:
    params = RateParams(rho, k)
    limit = eps_tilde(params)
    labelled = [(1.0, params.rho_k, -1), (c_zero(params), rho_zero(params), 0)]
    for i in range(1, M + 1):
        eps_i = rho / 2.0 ** (i - 1)
        if i == 1:
            budget, rate = c1_rho1(params)
        elif eps_i <= limit:
            budget, rate = p_eps_l1(rho, eps_i, k), rho_eps(rho, eps_i, k)
        else:
            budget, rate = l1_norm(rescaled_cheb(rho, eps_i, k)), rho_eps(rho, eps_i, k)
        labelled.append((budget, rate, i))
    labelled.append((c_star(params), rho_star(params), M + 1))
    labelled.sort(key=lambda item: item[0])
    LOGGER.debug("event=knots rho=%s k=%s M=%s knots=%s", rho, k, M, labelled)
    return BoundKnots(
        knots=tuple((c, r) for c, r, _ in labelled),
        indices=tuple(i for _, _, i in labelled),
        M=M,
        rho_star=rho_star(params),
    )


def global_bound(params: RateParams, M: int) -> BoundKnots:
    """Build the knots of the piecewise-linear upper bound on the constrained rate.

    Knots: (1, rho^k), (c_zero, rho_zero), (||p_eps_i||_1, rho_eps_i) for
    eps_i = rho / 2^(i-1), i = 1..M, and (C*, rho*), sorted by budget.
    C_1 uses the closed form of ``c1_rho1``; other samples use the
    alternating-sign closed form when eps_i <= eps_tilde and the coefficient
    sum of ``rescaled_cheb`` otherwise.

    Raises:
        DomainError: If k <= 2 or M < 1.
    """
    if params.k <= 2:
        raise DomainError(f"the piecewise bound needs k > 2, got k={params.k}")
    if int(M) != M or M < 1:
        raise DomainError(f"M must be an integer >= 1, got {M}")
    return _knots(params.rho, params.k, int(M))


def evaluate_bound(knots: BoundKnots, C: float) -> float:
    """Return max(chords through consecutive knots evaluated at C, rho*).

    Consecutive knots with equal budgets are skipped.

    Raises:
        DomainError: If C < 1 (the constrained problem is infeasible there).
    """
    if C < 1.0:
        raise DomainError(f"C must be >= 1, got {C}")
    best = knots.rho_star
    for (c_a, r_a), (c_b, r_b) in zip(knots.knots[:-1], knots.knots[1:]):
        width = c_b - c_a
        if width <= 0.0:
            continue
        best = max(best, ((C - c_a) * r_b + (c_b - C) * r_a) / width)
    return best


def hat_rho(params: RateParams, C: float, alpha: float, M: int) -> float:
    """Return the one-step CAA rate bound: piecewise bound(C) + 3 alpha k C."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    return evaluate_bound(global_bound(params, M), C) + 3.0 * alpha * params.k * C


def hat_rho_grad(params: RateParams, C: float, eta: float, L: float, grad_norm: float, M: int) -> float:
    """Return the gradient-step rate bound: bound(C) + 3 (eta / L^2) ||grad f(x0)|| k^2 C^2."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if eta < 0 or grad_norm < 0:
        raise ValueError(f"eta and grad_norm must be non-negative, got eta={eta}, grad_norm={grad_norm}")
    penalty = 3.0 * eta / L**2 * grad_norm * params.k**2 * C**2
    return evaluate_bound(global_bound(params, M), C) + penalty


def alpha_thresholds(params: RateParams) -> Tuple[float, float, float]:
    """Return (alpha0, alpha1, alpha2), the perturbation levels guaranteeing acceleration.

    alpha0: some interval around c_zero accelerates; alpha1: all of [c_zero, C_1];
    alpha2: all of [c_zero, C*]. Values that underflow are clipped to 0.
    """
    rk, k = params.rho_k, params.k
    c1, rho1 = c1_rho1(params)
    alpha0 = max(0.0, rk * (1.0 - rk) / (3.0 * k * (2.0 + rk)))
    alpha1 = min(alpha0, max(0.0, (rk - rho1) / (3.0 * k * c1)))
    alpha2 = min(alpha0, max(0.0, (rk - rho_star(params)) / (3.0 * k * c_star(params))))
    return alpha0, alpha1, alpha2


def grad_thresholds(params: RateParams) -> Tuple[float, float, float]:
    """Return (alpha3, alpha4, alpha5), the gradient-step counterparts on (eta / L^2) ||grad f(x0)||."""
    rk, k = params.rho_k, params.k
    c1, rho1 = c1_rho1(params)
    alpha3 = max(0.0, rk * (1.0 - rk) * (2.0 - rk) / (3.0 * k**2 * (2.0 + rk) ** 2))
    alpha4 = min(alpha3, max(0.0, (rk - rho1) / (3.0 * k**2 * c1**2)))
    alpha5 = min(alpha3, max(0.0, (rk - rho_star(params)) / (3.0 * k**2 * c_star(params) ** 2)))
    return alpha3, alpha4, alpha5


def n_threshold(params: RateParams, eta: float, L: float, grad_norm0: float) -> float:
    """Return the outer-iteration count after which guarded CAA provably beats rho^(kN).

    The value is real (callers take the ceiling); a value <= 0 means the
    guarantee holds from the start. Returns -inf when eta * grad_norm0 == 0 and
    +inf when alpha3 underflows to 0.
    """
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if eta < 0 or grad_norm0 < 0:
        raise ValueError(f"eta and grad_norm0 must be non-negative, got eta={eta}, grad_norm0={grad_norm0}")
    level = eta / L**2 * grad_norm0
    if level == 0.0:
        return -math.inf
    alpha3 = grad_thresholds(params)[0]
    if alpha3 == 0.0:
        return math.inf
    return math.log(level / alpha3) / (params.k * math.log(1.0 / params.rho))


def guarded_rate_trajectory(
    params: RateParams,
    C: float,
    eta: float,
    L: float,
    grad_norm0: float,
    N: int,
    M: int = 1,
) -> np.ndarray:
    """Return the product bound g_0..g_N on gradient norms of guarded CAA.

    g_i = min(rho^k, bound_M(C) + 3 (eta / L^2) g_{i-1} k^2 C^2) * g_{i-1}.
    """
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    base = evaluate_bound(global_bound(params, M), C)
    factor = 3.0 * eta / L**2 * params.k**2 * C**2
    norms = np.empty(int(N) + 1)
    norms[0] = grad_norm0
    for i in range(1, int(N) + 1):
        norms[i] = min(params.rho_k, base + factor * norms[i - 1]) * norms[i - 1]
    return norms


__all__ = [
    "BoundKnots",
    "RateParams",
    "alpha_thresholds",
    "c1_rho1",
    "c_star",
    "c_zero",
    "eps_tilde",
    "evaluate_bound",
    "global_bound",
    "grad_thresholds",
    "guarded_rate_trajectory",
    "hat_rho",
    "hat_rho_grad",
    "lemma1_chord",
    "n_threshold",
    "p_eps_l1",
    "rho_eps",
    "rho_star",
    "rho_zero",
    "tilde_rho_small_C",
]
