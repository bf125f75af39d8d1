"""The four CLI commands, each turning an ExperimentConfig into a Table."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional, Tuple

from src.caa import CaaConfig, RunTrace, guarded_caa
from src.chebsolve import CurvePoint, solve_ctr_cheb_curve
from src.cli.output import Table
from src.cli.settings import DEFAULT_RUN_BUDGETS, DEFAULT_SWEEP, ExperimentConfig, parse_budgets
from src.errors import DivergenceError
from src.operators import audit_contractivity, initial_point, make_gradient_step
from src.rates import (
    RateParams,
    alpha_thresholds,
    c1_rho1,
    c_star,
    c_zero,
    eps_tilde,
    evaluate_bound,
    global_bound,
    grad_thresholds,
    hat_rho,
    hat_rho_grad,
    lemma1_chord,
    n_threshold,
    rho_star,
    tilde_rho_small_C,
)

LOGGER = logging.getLogger(__name__)

RATES_COLUMNS = [
    "rho",
    "k",
    "rho_star",
    "c_star",
    "c0",
    "c1",
    "rho1",
    "eps_tilde",
    "alpha0",
    "alpha1",
    "alpha2",
    "alpha3",
    "alpha4",
    "alpha5",
]
CHEBSOLVE_COLUMNS = [
    "C",
    "rho_tilde_lp",
    "lemma2_bound",
    "prop5_bound",
    "lemma1_chord",
    "proj_bound",
    "rho_star",
    "rho_pow_k",
    "hat_rho",
    "hat_rho_grad_Mk",
    "hat_rho_grad_M1",
    "status",
]
RUN_COLUMNS = [
    "C",
    "outer_iter",
    "grad_norm",
    "ratio",
    "guard_taken",
    "coeff_l1",
    "bound_hat_rho",
    "rho_kN",
    "bound_grad_norm",
]
THRESHOLD_COLUMNS = ["quantity", "value"]

GUARD_SLACK = 1e-12
GUARD_FLOOR = 1e-15
AUDIT_PAIRS = 100


def _budgets(config: ExperimentConfig, params: RateParams, default: str) -> List[float]:
    budgets = parse_budgets(config.C if config.C is not None else default, params)
    if not budgets:
        raise ValueError("C: no budgets given")
    return budgets


def cmd_rates(config: ExperimentConfig, workers: int = 1) -> Table:
    """Tabulate the closed-form quantities for every configured (rho, k) pair."""
    table = Table("rates", list(RATES_COLUMNS))
    for rho in config.rho:
        for k in config.k:
            params = RateParams(rho, k)
            c1, rho1 = c1_rho1(params)
            table.rows.append(
                [
                    rho,
                    k,
                    rho_star(params),
                    c_star(params),
                    c_zero(params),
                    c1,
                    rho1,
                    eps_tilde(params),
                    *alpha_thresholds(params),
                    *grad_thresholds(params),
                ]
            )
    return table


def _point_value(point: CurvePoint) -> Optional[float]:
    return None if point.solution is None else point.solution.value


def cmd_chebsolve(config: ExperimentConfig, workers: int = 1) -> Table:
    """Sweep the budget and tabulate the LP oracle next to every closed-form curve.

    The perturbed one-step bounds ride along: ``hat_rho`` for the configured
    ``alpha`` (empty when alpha is 0) and ``hat_rho_grad`` for
    (eta, L, grad_norm0) with M knots and with a single knot.

    Points whose exchange loop did not converge are kept with status
    ``not_converged`` and mark the table as failed.
    """
    params = config.single()
    budgets = _budgets(config, params, DEFAULT_SWEEP)
    M = config.knot_count(params.k)
    knots = global_bound(params, M) if params.k > 2 else None
    corner = c_zero(params)

    def perturbed(budget: float) -> List[Optional[float]]:
        if knots is None:
            return [None, None, None]
        return [
            hat_rho(params, budget, config.alpha, M) if config.alpha > 0 else None,
            hat_rho_grad(params, budget, config.eta, config.L, config.grad_norm0, M),
            hat_rho_grad(params, budget, config.eta, config.L, config.grad_norm0, 1),
        ]

    direct = solve_ctr_cheb_curve(params.rho, params.k, budgets, tol=config.tol, workers=workers)
    projected = solve_ctr_cheb_curve(
        params.rho, params.k, budgets, tol=config.tol, workers=workers, mode="projection"
    )

    table = Table("chebsolve", list(CHEBSOLVE_COLUMNS))
    floor, top = rho_star(params), params.rho_k
    for budget, lp_point, proj_point in zip(budgets, direct, projected):
        converged = lp_point.converged and proj_point.converged and lp_point.solution is not None
        if not converged:
            table.failed = True
            LOGGER.error("event=not_converged C=%s", budget)
        table.rows.append(
            [
                budget,
                _point_value(lp_point),
                tilde_rho_small_C(params, budget) if 1.0 <= budget <= corner else None,
                evaluate_bound(knots, budget) if knots is not None else None,
                lemma1_chord(params, budget),
                _point_value(proj_point),
                floor,
                top,
                *perturbed(budget),
                "ok" if converged else "not_converged",
            ]
        )
    return table


def _guard_holds(trace: RunTrace, rho_k: float) -> bool:
    previous = trace.grad_norm0
    for record in trace.records:
        if record.grad_norm > rho_k * previous * (1.0 + GUARD_SLACK) + GUARD_FLOOR * trace.grad_norm0:
            return False
        previous = record.grad_norm
    return True


def _run_one(spec, x0, config: ExperimentConfig, k: int, budget: float) -> Tuple[RunTrace, bool]:
    cfg = CaaConfig(k=k, C=budget, rel_tol=config.rel_tol, unconstrained=config.unconstrained)
    try:
        return guarded_caa(spec, x0, cfg, config.N, grad_tol=config.grad_tol, M=config.knot_count(k)), False
    except DivergenceError as exc:
        LOGGER.error("event=divergence C=%s error=%s", budget, exc)
        return exc.trace, True


def cmd_run(config: ExperimentConfig, workers: int = 1) -> Table:
    """Run guarded CAA once per configured budget on the same operator and start point.

    The operator's rho comes from (mu, L); the configured ``rho`` is only used
    to resolve ``cstar`` tokens in the budget spec.
    """
    k = config.k[0]
    if len(config.k) != 1:
        raise ValueError("run takes a single k")
    spec = make_gradient_step(config.family, config.operator_params(), config.seed)
    params = RateParams(spec.rho, k) if 0.0 < spec.rho < 1.0 else config.single()
    budgets = _budgets(config, params, DEFAULT_RUN_BUDGETS)

    observed = audit_contractivity(spec, pairs=AUDIT_PAIRS, seed=config.seed)
    if observed > spec.rho * (1.0 + 1e-9):
        LOGGER.warning("event=contractivity_audit observed=%.17g rho=%.17g", observed, spec.rho)
    x0 = initial_point(spec, config.grad_norm0, seed=config.seed)

    outcomes: List[Optional[Tuple[RunTrace, bool]]] = [None] * len(budgets)
    if workers > 1 and len(budgets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_map = {
                executor.submit(_run_one, spec, x0, config, k, budget): index for index, budget in enumerate(budgets)
            }
            for fut in as_completed(future_map):
                outcomes[future_map[fut]] = fut.result()
    else:
        outcomes = [_run_one(spec, x0, config, k, budget) for budget in budgets]

    rho_k = spec.rho**k
    table = Table("run", list(RUN_COLUMNS))
    for budget, (trace, diverged) in zip(budgets, outcomes):
        g0 = trace.grad_norm0
        table.rows.append([budget, 0, g0, None, None, None, None, g0, g0])
        for record in trace.records:
            table.rows.append(
                [
                    budget,
                    record.index,
                    record.grad_norm,
                    record.ratio,
                    record.guard_taken,
                    record.coeff_l1,
                    record.rate_estimate,
                    g0 * rho_k**record.index,
                    record.bound_grad_norm,
                ]
            )
        if diverged:
            table.failed = True
        elif not _guard_holds(trace, rho_k):
            LOGGER.error("event=guard_violation C=%s", budget)
            table.failed = True
    return table


def cmd_thresholds(config: ExperimentConfig, workers: int = 1) -> Table:
    """Report the perturbation thresholds and whether the configured perturbation clears them.

    ``alpha`` is compared with alpha0..alpha2 and (eta / L^2) grad_norm0 with
    alpha3..alpha5.
    """
    params = config.single()
    level = config.eta / config.L**2 * config.grad_norm0
    linear = alpha_thresholds(params)
    gradient = grad_thresholds(params)
    table = Table("thresholds", list(THRESHOLD_COLUMNS))
    for index, value in enumerate(linear + gradient):
        table.rows.append([f"alpha{index}", value])
    table.rows.append(["alpha", config.alpha])
    table.rows.append(["grad_level", level])
    for index, value in enumerate(linear):
        table.rows.append([f"cleared_alpha{index}", _verdict(config.alpha <= value)])
    for index, value in enumerate(gradient, start=3):
        table.rows.append([f"cleared_alpha{index}", _verdict(level <= value)])
    bound = n_threshold(params, config.eta, config.L, config.grad_norm0)
    table.rows.append(["n_threshold", bound])
    table.rows.append(["n_threshold_ceil", _ceil(bound)])
    return table


def _verdict(flag: bool) -> str:
    return "cleared" if flag else "not cleared"


def _ceil(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return str(max(0, math.ceil(value)))


COMMANDS = {
    "rates": cmd_rates,
    "chebsolve": cmd_chebsolve,
    "run": cmd_run,
    "thresholds": cmd_thresholds,
}


__all__ = [
    "CHEBSOLVE_COLUMNS",
    "COMMANDS",
    "RATES_COLUMNS",
    "RUN_COLUMNS",
    "THRESHOLD_COLUMNS",
    "cmd_chebsolve",
    "cmd_rates",
    "cmd_run",
    "cmd_thresholds",
]
