import math

import numpy as np
import pytest

from src.errors import DomainError
from src.polynomials import l1_norm, max_abs_on_interval, rescaled_cheb
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
    guarded_rate_trajectory,
    hat_rho,
    hat_rho_grad,
    lemma1_chord,
    n_threshold,
    p_eps_l1,
    rho_eps,
    rho_star,
    rho_zero,
    tilde_rho_small_C,
)

GRID = [(rho, k) for rho in (0.9, 0.999) for k in (3, 5, 8)]


@pytest.mark.parametrize("rho, k", [(0.0, 3), (1.0, 3), (-0.5, 3), (0.9, 0), (0.9, 2.5)])
def test_rate_params_validation(rho, k):
    with pytest.raises(DomainError):
        RateParams(rho, k)


def test_domain_error_is_a_value_error():
    with pytest.raises(ValueError):
        RateParams(1.5, 3)


@pytest.mark.parametrize(
    "rho, k, expected, tolerance",
    [
        (0.9, 3, 34.141, 0.01),
        (0.9, 5, 370.62, 0.5),
        (0.9, 8, 12920.0, 20.0),
        (0.999, 3, 97.45, 0.05),
        (0.999, 5, 3213.8, 2.0),
        (0.999, 8, 5.9216e5, 1e2),
    ],
)
def test_c_star_matches_published_ranges(rho, k, expected, tolerance):
    assert c_star(RateParams(rho, k)) == pytest.approx(expected, abs=tolerance)


def test_rho_star_degree_one():
    assert rho_star(RateParams(0.75, 1)) == pytest.approx(0.6, abs=1e-15)


def test_rho_star_vanishes_with_rho():
    assert rho_star(RateParams(1e-12, 3)) < 1e-30


def test_rho_star_matches_polynomial_maximum():
    value, _ = max_abs_on_interval(rescaled_cheb(0.9, 0.0, 5), 0.0, 0.9)

    assert rho_star(RateParams(0.9, 5)) == pytest.approx(value, abs=1e-10)


@pytest.mark.parametrize("rho, k", GRID)
def test_rho_star_beats_plain_iteration(rho, k):
    params = RateParams(rho, k)
    assert 0.0 < rho_star(params) < params.rho_k


def test_eps_tilde_degree_one_is_rho():
    assert eps_tilde(RateParams(0.9, 1)) == pytest.approx(0.9, abs=1e-15)


def test_eps_tilde_zeroes_the_smallest_root():
    params = RateParams(0.9, 5)
    limit = eps_tilde(params)

    assert 0.0 < limit < 0.9
    assert rescaled_cheb(0.9, limit, 5)(0.0) == pytest.approx(0.0, abs=1e-10)


def test_eps_tilde_increases_with_rho():
    values = [eps_tilde(RateParams(rho, 5)) for rho in (0.5, 0.9, 0.999)]
    assert values == sorted(values)


def test_rho_eps_reductions():
    params = RateParams(0.9, 5)

    assert rho_eps(0.9, 0.0, 5) == rho_star(params)
    assert rho_eps(0.9, 0.9, 5) == pytest.approx(c1_rho1(params)[1], abs=1e-12)
    value, _ = max_abs_on_interval(rescaled_cheb(0.9, 0.9, 5), 0.0, 0.9)
    assert rho_eps(0.9, 0.9, 5) == pytest.approx(value, abs=1e-10)


def test_rho_eps_increases_with_eps():
    values = [rho_eps(0.9, eps, 5) for eps in np.linspace(0.0, 0.9, 20)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_rho_eps_rejects_negative_eps():
    with pytest.raises(DomainError):
        rho_eps(0.9, -0.1, 5)


@pytest.mark.parametrize("rho, k", [(0.9, 5), (0.999, 8)])
def test_p_eps_l1_matches_coefficient_sum(rho, k):
    limit = eps_tilde(RateParams(rho, k))
    for eps in np.linspace(0.0, limit, 20):
        expected = l1_norm(rescaled_cheb(rho, eps, k))
        assert p_eps_l1(rho, eps, k) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("rho, k", GRID)
def test_p_eps_l1_at_zero_is_c_star(rho, k):
    assert p_eps_l1(rho, 0.0, k) == pytest.approx(c_star(RateParams(rho, k)), rel=1e-10)


def test_p_eps_l1_small_window_reference_value():
    assert p_eps_l1(0.9, 0.0, 3) == pytest.approx(34.141, abs=0.01)


def test_p_eps_l1_rejects_eps_beyond_alternation():
    limit = eps_tilde(RateParams(0.9, 5))
    with pytest.raises(DomainError):
        p_eps_l1(0.9, limit * 1.01, 5)


def test_c1_rho1_matches_coefficient_sum():
    c1, rho1 = c1_rho1(RateParams(0.9, 5))

    assert c1 == pytest.approx(l1_norm(rescaled_cheb(0.9, 0.9, 5)), rel=1e-9)
    assert rho1 == pytest.approx(rho_eps(0.9, 0.9, 5), abs=1e-12)


@pytest.mark.parametrize("rho, k", GRID)
def test_small_budget_corner_precedes_c1_and_c_star(rho, k):
    params = RateParams(rho, k)
    c1, _ = c1_rho1(params)

    assert c_zero(params) < c1 < c_star(params)


def test_tilde_rho_small_C_values():
    params = RateParams(0.9, 3)

    assert tilde_rho_small_C(params, 1.0) == pytest.approx(params.rho_k, abs=1e-15)
    assert tilde_rho_small_C(params, 1.5) == pytest.approx(0.66125, abs=1e-12)
    assert tilde_rho_small_C(params, c_zero(params)) == pytest.approx(rho_zero(params), abs=1e-12)


@pytest.mark.parametrize("C", [0.99, 10.0])
def test_tilde_rho_small_C_outside_range(C):
    with pytest.raises(DomainError):
        tilde_rho_small_C(RateParams(0.9, 3), C)


def test_lemma1_chord_endpoints():
    params = RateParams(0.9, 5)

    assert lemma1_chord(params, 1.0) == pytest.approx(params.rho_k, abs=1e-15)
    assert lemma1_chord(params, c_star(params)) == pytest.approx(rho_star(params), abs=1e-15)
    assert lemma1_chord(params, 10 * c_star(params)) == rho_star(params)
    with pytest.raises(DomainError):
        lemma1_chord(params, 0.5)


@pytest.mark.parametrize("rho, k", GRID)
def test_global_bound_knots(rho, k):
    params = RateParams(rho, k)
    knots = global_bound(params, k)
    budgets = [c for c, _ in knots.knots]

    assert len(knots.knots) == k + 3
    assert knots.knots[0] == (1.0, params.rho_k)
    assert knots.knots[1][0] == pytest.approx(c_zero(params))
    assert knots.c_star == pytest.approx(c_star(params))
    assert knots.indices[0] == -1 and knots.indices[-1] == k + 1
    assert all(b > a for a, b in zip(budgets, budgets[1:]))


@pytest.mark.parametrize("rho, k", GRID)
def test_evaluate_bound_endpoints_and_monotonicity(rho, k):
    params = RateParams(rho, k)
    knots = global_bound(params, k)
    budgets = np.geomspace(1.0, c_star(params), 50)
    values = [evaluate_bound(knots, C) for C in budgets]

    assert values[0] == pytest.approx(params.rho_k, rel=1e-9)
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert evaluate_bound(knots, c_star(params)) == pytest.approx(rho_star(params), rel=1e-9)
    assert evaluate_bound(knots, 2 * c_star(params)) == pytest.approx(rho_star(params), rel=1e-9)


def test_evaluate_bound_tightens_the_convexity_chord():
    params = RateParams(0.9, 5)
    knots = global_bound(params, 5)
    for C in np.geomspace(1.0, c_star(params), 30):
        assert evaluate_bound(knots, C) <= lemma1_chord(params, C) + 1e-12


def test_global_bound_errors():
    with pytest.raises(DomainError):
        global_bound(RateParams(0.9, 2), 3)
    with pytest.raises(DomainError):
        global_bound(RateParams(0.9, 5), 0)
    with pytest.raises(DomainError):
        evaluate_bound(global_bound(RateParams(0.9, 5), 3), 0.5)


def test_hat_rho_adds_the_nonlinear_penalty():
    params = RateParams(0.9, 5)
    base = evaluate_bound(global_bound(params, 3), 2.0)

    assert hat_rho(params, 2.0, 0.0, 3) == base
    assert hat_rho(params, 2.0, 1e-3, 3) == pytest.approx(base + 3 * 1e-3 * 5 * 2.0)
    assert hat_rho(params, 1.5, 1.0, 3) > 1.0
    with pytest.raises(ValueError):
        hat_rho(params, 2.0, -1.0, 3)


def test_hat_rho_grad_penalty():
    params = RateParams(0.999, 5)
    base = evaluate_bound(global_bound(params, 1), 10.0)

    assert hat_rho_grad(params, 10.0, 1e-2, 1.0, 0.0, 1) == base
    assert hat_rho_grad(params, 10.0, 1e-2, 2.0, 0.1, 1) == pytest.approx(base + 3 * 1e-2 / 4 * 0.1 * 25 * 100)
    assert hat_rho_grad(params, 2.0, 1e6, 1.0, 1.0, 1) > params.rho_k
    with pytest.raises(ValueError):
        hat_rho_grad(params, 10.0, 1e-2, 0.0, 0.1, 1)


@pytest.mark.parametrize("rho, k", GRID)
def test_threshold_ordering(rho, k):
    params = RateParams(rho, k)
    alpha0, alpha1, alpha2 = alpha_thresholds(params)
    alpha3, alpha4, alpha5 = grad_thresholds(params)

    assert 0.0 <= alpha2 <= alpha1 <= alpha0
    assert 0.0 <= alpha5 <= alpha4 <= alpha3


def test_alpha0_near_one_scales_like_one_minus_rho():
    alpha0 = alpha_thresholds(RateParams(0.9999, 5))[0]
    assert alpha0 / (1.0 - 0.9999) == pytest.approx(1.0 / 9.0, rel=0.05)


def test_perturbation_below_alpha0_accelerates_at_corner():
    params = RateParams(0.9, 5)
    alpha0 = alpha_thresholds(params)[0]

    assert hat_rho(params, c_zero(params), 0.99 * alpha0, 1) < params.rho_k


def test_n_threshold_shift_when_doubling_gradient():
    params = RateParams(0.999, 5)
    base = n_threshold(params, 1e-2, 1.0, 0.1)
    doubled = n_threshold(params, 1e-2, 1.0, 0.2)

    assert 0.0 < base < math.inf
    assert doubled - base == pytest.approx(math.log(2.0) / (5 * math.log(1.0 / 0.999)), rel=1e-9)


def test_n_threshold_edge_cases():
    params = RateParams(0.9, 5)

    assert n_threshold(params, 1e-2, 1.0, 1e-12) < 0.0
    assert n_threshold(params, 0.0, 1.0, 0.1) == -math.inf
    with pytest.raises(ValueError):
        n_threshold(params, 1e-2, 0.0, 0.1)


def test_guarded_rate_trajectory():
    params = RateParams(0.999, 5)
    norms = guarded_rate_trajectory(params, 1e2, 1e-2, 1.0, 0.1, 50)

    assert norms.shape == (51,)
    assert norms[0] == 0.1
    ratios = norms[1:] / norms[:-1]
    assert np.all(ratios <= params.rho_k + 1e-15)
    assert np.all(np.diff(ratios) <= 1e-15)


def test_guarded_rate_trajectory_without_perturbation_is_geometric():
    params = RateParams(0.9, 5)
    base = evaluate_bound(global_bound(params, 1), 3.0)
    norms = guarded_rate_trajectory(params, 3.0, 0.0, 1.0, 1.0, 10)

    np.testing.assert_allclose(norms, base ** np.arange(11), rtol=1e-12)
