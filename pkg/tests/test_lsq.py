import itertools

import numpy as np
import pytest

from src.errors import ConvergenceError
from src.lsq import ExtrapolationWeights, linear_minimization, solve_weights


def _vertices(C, m):
    if C == 1.0:
        return [np.eye(m)[i] for i in range(m)]
    vertices = []
    for i, j in itertools.permutations(range(m), 2):
        vertex = np.zeros(m)
        vertex[i] = (C + 1) / 2
        vertex[j] = -(C - 1) / 2
        vertices.append(vertex)
    return vertices


def _oracle(R, C):
    """Exact optimum over {sum(c) = 1, ||c||_1 <= C} by enumerating segments between vertices."""
    m = R.shape[1]
    best = np.inf
    base = R[:, 0]
    directions = R[:, 1:] - base[:, None]
    z = np.linalg.lstsq(directions, -base, rcond=None)[0]
    interior = np.concatenate([[1 - z.sum()], z])
    if np.abs(interior).sum() <= C:
        best = np.linalg.norm(R @ interior)
    vertices = _vertices(C, m)
    for u, v in itertools.combinations(vertices, 2):
        a, d = R @ u, R @ (v - u)
        t = 0.0 if d @ d == 0 else min(1.0, max(0.0, -(a @ d) / (d @ d)))
        best = min(best, np.linalg.norm(a + t * d))
    for u in vertices:
        best = min(best, np.linalg.norm(R @ u))
    return best


def _assert_feasible(weights: ExtrapolationWeights, C: float, R: np.ndarray):
    assert weights.c.sum() == pytest.approx(1.0, abs=1e-10)
    assert weights.l1 <= C * (1 + 1e-10)
    assert weights.residual_norm == pytest.approx(np.linalg.norm(R @ weights.c), rel=1e-12)


def test_zero_column_gives_unit_weight():
    R = np.array([[1.0, 0.0, 2.0], [3.0, 0.0, -1.0]])
    weights = solve_weights(R, 2.0)

    np.testing.assert_array_equal(weights.c, [0.0, 1.0, 0.0])
    assert weights.residual_norm == 0.0
    assert weights.gap == 0.0


def test_identical_columns_have_a_single_residual():
    v = np.array([1.0, -2.0, 0.5])
    R = np.column_stack([v, v, v])
    weights = solve_weights(R, 3.0)

    _assert_feasible(weights, 3.0, R)
    assert weights.residual_norm == pytest.approx(np.linalg.norm(v), rel=1e-12)


def test_orthonormal_columns_split_evenly():
    R = np.eye(3)[:, :2]
    weights = solve_weights(R, 1.0)

    np.testing.assert_allclose(weights.c, [0.5, 0.5], atol=1e-8)
    assert weights.residual_norm == pytest.approx(np.sqrt(0.5), abs=1e-8)


def test_large_budget_returns_affine_least_squares(rng):
    R = rng.standard_normal((6, 4))
    weights = solve_weights(R, 1e9)

    _assert_feasible(weights, 1e9, R)
    assert weights.iterations == 0
    assert weights.gap == 0.0
    assert weights.residual_norm == pytest.approx(_oracle(R, 1e9), rel=1e-9)


@pytest.mark.parametrize("C", [1.0, 1.5, 2.0, 3.0])
def test_matches_enumeration_oracle(rng, C):
    for _ in range(100):
        R = rng.standard_normal((4, 3))
        weights = solve_weights(R, C)
        _assert_feasible(weights, C, R)
        assert weights.residual_norm == pytest.approx(_oracle(R, C), abs=1e-6)
        assert weights.residual_norm - _oracle(R, C) <= weights.gap + 1e-12


def test_ill_conditioned_columns_respect_the_budget():
    R = np.array([[1.0, 1.1], [0.01, 0.0]])
    for C in (1.0, 2.0, 5.0):
        weights = solve_weights(R, C, rel_tol=1e-12)
        _assert_feasible(weights, C, R)
        assert weights.residual_norm == pytest.approx(_oracle(R, C), abs=1e-9)


def test_residual_is_monotone_in_budget(rng):
    R = rng.standard_normal((10, 6))
    R[:, 1:] = R[:, [0]] + 1e-3 * R[:, 1:]
    values = [solve_weights(R, C).residual_norm for C in (1.0, 2.0, 4.0, 16.0, 1e3)]

    tolerance = 1e-8 * np.linalg.norm(R[:, 0])
    assert all(b <= a + 2 * tolerance for a, b in zip(values, values[1:]))


def test_iteration_cap_returns_best_feasible_weights():
    R = np.array([[1.0, 1.1], [0.01, 0.0]])

    with pytest.raises(ConvergenceError) as excinfo:
        solve_weights(R, 2.0, rel_tol=1e-14, max_iterations=1)

    best = excinfo.value.best
    assert best.converged is False
    _assert_feasible(best, 2.0, R)


@pytest.mark.parametrize(
    "R, C, rel_tol",
    [
        (np.array([[1.0, np.nan], [0.0, 1.0]]), 2.0, 1e-8),
        (np.array([[1.0, np.inf], [0.0, 1.0]]), 2.0, 1e-8),
        (np.ones((3, 1)), 2.0, 1e-8),
        (np.ones(3), 2.0, 1e-8),
        (np.eye(2), 0.5, 1e-8),
        (np.eye(2), 2.0, 0.0),
    ],
)
def test_invalid_arguments(R, C, rel_tol):
    with pytest.raises(ValueError):
        solve_weights(R, C, rel_tol=rel_tol)


@pytest.mark.parametrize(
    "gradient, C, expected",
    [
        ([3.0, 1.0, 2.0], 2.0, [-0.5, 1.5, 0.0]),
        ([3.0, 1.0, 2.0], 1.0, [0.0, 1.0, 0.0]),
        ([1.0, 1.0, 1.0], 4.0, [1.0, 0.0, 0.0]),
        ([0.0, 2.0, -2.0], 3.0, [0.0, -1.0, 2.0]),
    ],
)
def test_linear_minimization(gradient, C, expected):
    np.testing.assert_allclose(linear_minimization(np.array(gradient), C), expected)


def test_linear_minimization_rejects_small_budget():
    with pytest.raises(ValueError):
        linear_minimization(np.ones(3), 0.9)
