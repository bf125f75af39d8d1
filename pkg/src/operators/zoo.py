"""Operator families used to exercise constrained Anderson acceleration.

Three kinds of maps are built here, all seeded and immutable once constructed:

- linear contractions F(x) = G x + b with G symmetric PSD, spectrum given;
- perturbed linear maps F(x) = G x + b + alpha sin(x + phi), whose
  nonlinear part is alpha-Lipschitz exactly;
- gradient steps F(x) = x - grad f(x) / L for a quadratic, a
  cubic-perturbed quadratic (Hessian exactly eta-Lipschitz) and ridge
  logistic regression.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit
from scipy.stats import ortho_group

LOGGER = logging.getLogger(__name__)

Vector = np.ndarray
VectorMap = Callable[[Vector], Vector]

FAMILIES = ("quadratic", "logistic_ridge", "cubic_perturbed_quadratic")
_FIXED_POINT_TOL = 1e-14
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class OperatorSpec:
    """A fixed-point map with the constants the rate bounds need.

    Attributes:
        apply: The map F.
        n: Ambient dimension.
        rho: Lipschitz constant of F (1 - mu/L for gradient steps).
        mu, L, eta: Strong convexity, gradient and Hessian Lipschitz constants
            of f for gradient steps; 0 otherwise.
        alpha: Exact Lipschitz constant of the nonlinear part when known.
        gradient: grad f for gradient steps.
        fixed_point: x* when known.
        name: Family label.
        linear_rho: Bound on the spectrum of the PSD linear part.
        objective: f for gradient steps.
        linear, offset: G and b for maps whose linear part is materialized.
    """

    apply: VectorMap
    n: int
    rho: float
    mu: float = 0.0
    L: float = 0.0
    eta: float = 0.0
    alpha: float = 0.0
    gradient: Optional[VectorMap] = None
    fixed_point: Optional[Vector] = None
    name: str = "linear"
    linear_rho: float = 0.0
    objective: Optional[Callable[[Vector], float]] = None
    linear: Optional[np.ndarray] = None
    offset: Optional[Vector] = None


def _orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.array([[1.0]])
    return ortho_group.rvs(dim=n, random_state=rng)


def _psd_from_spectrum(spectrum: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    Q = _orthogonal(spectrum.size, rng)
    matrix = (Q * spectrum) @ Q.T
    return (matrix + matrix.T) / 2.0


def _check_spectrum(spectrum: Sequence[float]) -> np.ndarray:
    values = np.asarray(spectrum, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("spectrum must not be empty")
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() >= 1.0:
        raise ValueError(f"spectrum values must lie in [0, 1), got range [{values.min()}, {values.max()}]")
    return values


def make_linear(spectrum: Sequence[float], seed: int = 0) -> OperatorSpec:
    """Return F(x) = Q diag(spectrum) Q^T x + b with seeded orthogonal Q and offset b.

    Raises:
        ValueError: If a spectrum value is outside [0, 1).
    """
    values = _check_spectrum(spectrum)
    rng = np.random.default_rng(seed)
    G = _psd_from_spectrum(values, rng)
    b = rng.standard_normal(values.size)
    x_star = np.linalg.solve(np.eye(values.size) - G, b)
    G.setflags(write=False)
    b.setflags(write=False)

    def apply(x: Vector) -> Vector:
        return G @ x + b

    rho = float(values.max())
    return OperatorSpec(
        apply=apply,
        n=int(values.size),
        rho=rho,
        fixed_point=x_star,
        name="linear",
        linear_rho=rho,
        linear=G,
        offset=b,
    )


def make_perturbed_linear(spectrum: Sequence[float], alpha: float, seed: int = 0) -> OperatorSpec:
    """Return F(x) = G x + b + alpha sin(x + phi) with G, b as in ``make_linear`` for the same seed.

    Raises:
        ValueError: If alpha < 0 or max(spectrum) + alpha >= 1.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    base = make_linear(spectrum, seed)
    rho = base.linear_rho + alpha
    if rho >= 1.0:
        raise ValueError(f"max(spectrum) + alpha must be < 1, got {rho}")
    if alpha == 0.0:
        return base

    phase = np.random.default_rng([seed, 1]).uniform(0.0, 2.0 * math.pi, base.n)
    G, b = base.linear, base.offset

    def apply(x: Vector) -> Vector:
        return G @ x + b + alpha * np.sin(x + phase)

    def jacobian(x: Vector) -> np.ndarray:
        return G + np.diag(alpha * np.cos(x + phase))

    x_star = _newton_fixed_point(apply, jacobian, base.fixed_point)
    return OperatorSpec(
        apply=apply,
        n=base.n,
        rho=rho,
        alpha=float(alpha),
        fixed_point=x_star,
        name="perturbed_linear",
        linear_rho=base.linear_rho,
        linear=G,
        offset=b,
    )


def _newton_fixed_point(apply: VectorMap, jacobian: Callable[[Vector], np.ndarray], x0: Vector) -> Vector:
    """Solve x = F(x) by Newton's method on x - F(x)."""
    x = np.array(x0, dtype=float)
    eye = np.eye(x.size)
    for _ in range(_NEWTON_MAX_ITER):
        residual = x - apply(x)
        if np.linalg.norm(residual) <= _FIXED_POINT_TOL * (1.0 + np.linalg.norm(x)):
            break
        x = x - np.linalg.solve(eye - jacobian(x), residual)
    return x


def _check_curvature(mu: float, L: float) -> None:
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    if mu > L:
        raise ValueError(f"mu must not exceed L, got mu={mu}, L={L}")


def _hessian_spectrum(n: int, low: float, high: float, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        if not math.isclose(low, high):
            raise ValueError("a one-dimensional quadratic needs mu == L")
        return np.array([low])
    return np.concatenate([[low, high], rng.uniform(low, high, n - 2)])


def _center(params: Mapping[str, Any], n: int, rng: np.random.Generator) -> Vector:
    if params.get("x_star") is not None:
        x_star = np.asarray(params["x_star"], dtype=float).ravel()
        if x_star.size != n:
            raise ValueError(f"x_star must have {n} entries, got {x_star.size}")
        return x_star
    return rng.standard_normal(n)


def _quadratic(params: Mapping[str, Any], rng: np.random.Generator) -> OperatorSpec:
    n = int(params.get("n", 10))
    mu, L = float(params["mu"]), float(params["L"])
    _check_curvature(mu, L)
    H = _psd_from_spectrum(_hessian_spectrum(n, mu, L, rng), rng)
    x_star = _center(params, n, rng)

    def gradient(x: Vector) -> Vector:
        return H @ (x - x_star)

    def objective(x: Vector) -> float:
        d = x - x_star
        return 0.5 * float(d @ (H @ d))

    step = np.eye(n) - H / L
    return _gradient_spec("quadratic", n, mu, L, 0.0, gradient, objective, x_star, linear=step, offset=H @ x_star / L)


def _cubic_derivative(t: Vector, eta: float, gamma: float) -> Vector:
    # phi''(t) = min(eta |t|, gamma)
    if eta == 0.0:
        return np.zeros_like(t)
    knee = gamma / eta
    a = np.abs(t)
    inner = eta * a * a / 2.0
    outer = gamma * a - gamma * gamma / (2.0 * eta)
    return np.sign(t) * np.where(a <= knee, inner, outer)


def _cubic_value(t: Vector, eta: float, gamma: float) -> float:
    if eta == 0.0:
        return 0.0
    knee = gamma / eta
    a = np.abs(t)
    inner = eta * a**3 / 6.0
    outer = eta * knee**3 / 6.0 + gamma * (a * a - knee * knee) / 2.0 - gamma * gamma / (2.0 * eta) * (a - knee)
    return float(np.sum(np.where(a <= knee, inner, outer)))


def _cubic_perturbed_quadratic(params: Mapping[str, Any], rng: np.random.Generator) -> OperatorSpec:
    n = int(params.get("n", 10))
    mu, L = float(params["mu"]), float(params["L"])
    eta = float(params.get("eta", 0.0))
    _check_curvature(mu, L)
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    gamma = float(params.get("gamma", (L - mu) / 2.0)) if eta > 0 else 0.0
    if eta > 0 and not 0.0 < gamma <= L - mu:
        raise ValueError(f"gamma must lie in (0, L - mu], got {gamma}")
    H = _psd_from_spectrum(_hessian_spectrum(n, mu, L - gamma, rng), rng)
    x_star = _center(params, n, rng)

    def gradient(x: Vector) -> Vector:
        d = x - x_star
        return H @ d + _cubic_derivative(d, eta, gamma)

    def objective(x: Vector) -> float:
        d = x - x_star
        return 0.5 * float(d @ (H @ d)) + _cubic_value(d, eta, gamma)

    return _gradient_spec("cubic_perturbed_quadratic", n, mu, L, eta, gradient, objective, x_star)


def _logistic_ridge(params: Mapping[str, Any], rng: np.random.Generator) -> OperatorSpec:
    n = int(params.get("n", 10))
    samples = int(params.get("m", 4 * n))
    lam = float(params.get("lam", params.get("mu", 0.0)))
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam}")
    A = rng.standard_normal((samples, n)) / math.sqrt(n)
    y = np.where(rng.random(samples) < 0.5, -1.0, 1.0)
    margins_matrix = A * y[:, np.newaxis]

    L = lam + float(np.linalg.norm(A, 2) ** 2) / (4.0 * samples)
    eta = float(np.sum(np.linalg.norm(A, axis=1) ** 3)) / (6.0 * math.sqrt(3.0) * samples)
    mu = lam

    def gradient(w: Vector) -> Vector:
        return -(margins_matrix.T @ expit(-(margins_matrix @ w))) / samples + lam * w

    def objective(w: Vector) -> float:
        return float(np.mean(np.logaddexp(0.0, -(margins_matrix @ w)))) + 0.5 * lam * float(w @ w)

    def hessian(w: Vector) -> np.ndarray:
        s = expit(margins_matrix @ w)
        return (A.T * (s * (1.0 - s))) @ A / samples + lam * np.eye(n)

    w = np.zeros(n)
    for _ in range(_NEWTON_MAX_ITER):
        g = gradient(w)
        if np.linalg.norm(g) <= _FIXED_POINT_TOL * L:
            break
        w = w - np.linalg.solve(hessian(w), g)

    return _gradient_spec("logistic_ridge", n, mu, L, eta, gradient, objective, w)


def _gradient_spec(
    name: str,
    n: int,
    mu: float,
    L: float,
    eta: float,
    gradient: VectorMap,
    objective: Callable[[Vector], float],
    x_star: Vector,
    linear: Optional[np.ndarray] = None,
    offset: Optional[Vector] = None,
) -> OperatorSpec:
    def apply(x: Vector) -> Vector:
        return x - gradient(x) / L

    rho = 1.0 - mu / L
    return OperatorSpec(
        apply=apply,
        n=n,
        rho=rho,
        mu=mu,
        L=L,
        eta=eta,
        gradient=gradient,
        fixed_point=x_star,
        name=name,
        linear_rho=rho,
        objective=objective,
        linear=linear,
        offset=offset,
    )


_BUILDERS = {
    "quadratic": _quadratic,
    "logistic_ridge": _logistic_ridge,
    "cubic_perturbed_quadratic": _cubic_perturbed_quadratic,
}


def make_gradient_step(family: str, params: Mapping[str, Any], seed: int = 0) -> OperatorSpec:
    """Return the gradient-step map x - grad f(x) / L for one of ``FAMILIES``.

    Params by family (``n`` defaults to 10 everywhere):
        quadratic: mu, L, optional x_star.
        cubic_perturbed_quadratic: mu, L, eta, optional gamma (curvature cap of
            the cubic term, default (L - mu) / 2) and x_star.
        logistic_ridge: lam (or mu), optional m (sample count, default 4n).

    Raises:
        ValueError: On an unknown family, mu <= 0 or mu > L.
    """
    if family not in _BUILDERS:
        raise ValueError(f"unknown operator family {family!r}; expected one of {', '.join(FAMILIES)}")
    spec = _BUILDERS[family](params, np.random.default_rng(seed))
    LOGGER.debug(
        "event=operator family=%s n=%s mu=%s L=%s eta=%s rho=%s", family, spec.n, spec.mu, spec.L, spec.eta, spec.rho
    )
    return spec


def alpha_gradient(eta: float, L: float, k: int, C: float, grad_norm0: float) -> float:
    """Return (eta / L^2) k C ||grad f(x0)||, the perturbation level of a gradient step on the CAA ball."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    if min(eta, k, C, grad_norm0) < 0:
        raise ValueError("eta, k, C and grad_norm0 must be non-negative")
    return eta / L**2 * k * C * grad_norm0


def fixed_point_residual_map(spec: OperatorSpec) -> VectorMap:
    """Return x -> grad f(x) for gradient steps and x -> F(x) - x otherwise."""
    if spec.gradient is not None:
        return spec.gradient
    return lambda x: spec.apply(x) - x


def initial_point(spec: OperatorSpec, grad_norm: float, seed: int = 0) -> Vector:
    """Return x* + t u with a seeded unit direction u and t chosen so the residual norm equals ``grad_norm``.

    The residual is ||grad f|| for gradient steps and ||F(x) - x|| otherwise.

    Raises:
        ValueError: If the operator has no known fixed point or ``grad_norm`` is not positive.
    """
    if spec.fixed_point is None:
        raise ValueError(f"operator {spec.name!r} has no known fixed point")
    if not grad_norm > 0:
        raise ValueError(f"grad_norm must be positive, got {grad_norm}")
    direction = np.random.default_rng(seed).standard_normal(spec.n)
    direction /= np.linalg.norm(direction)
    residual = fixed_point_residual_map(spec)

    def excess(t: float) -> float:
        return float(np.linalg.norm(residual(spec.fixed_point + t * direction))) - grad_norm

    upper = grad_norm
    for _ in range(200):
        if excess(upper) > 0:
            break
        upper *= 2.0
    else:
        raise ValueError(f"could not reach residual norm {grad_norm} along the sampled direction")
    t = brentq(excess, 0.0, upper, xtol=1e-15, rtol=1e-14)
    return spec.fixed_point + t * direction


def empirical_lipschitz(
    fn: VectorMap,
    n: int,
    pairs: int = 1000,
    seed: int = 0,
    scale: float = 1.0,
    center: Optional[Vector] = None,
) -> float:
    """Return max ||fn(x) - fn(y)|| / ||x - y|| over random Gaussian pairs around ``center``."""
    rng = np.random.default_rng(seed)
    origin = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    worst = 0.0
    for _ in range(pairs):
        x = origin + scale * rng.standard_normal(n)
        y = origin + scale * rng.standard_normal(n)
        distance = np.linalg.norm(x - y)
        if distance == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(fn(x) - fn(y)) / distance))
    return worst


def audit_contractivity(spec: OperatorSpec, pairs: int = 1000, seed: int = 0, scale: float = 1.0) -> float:
    """Return the largest sampled Lipschitz ratio of ``spec.apply`` around its fixed point."""
    return empirical_lipschitz(spec.apply, spec.n, pairs=pairs, seed=seed, scale=scale, center=spec.fixed_point)


__all__ = [
    "FAMILIES",
    "OperatorSpec",
    "alpha_gradient",
    "audit_contractivity",
    "empirical_lipschitz",
    "fixed_point_residual_map",
    "initial_point",
    "make_gradient_step",
    "make_linear",
    "make_perturbed_linear",
]
