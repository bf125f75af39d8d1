"""Monomial-basis polynomials, Chebyshev polynomials and their interval rescalings.

Every polynomial in the project (T_k, the rescaled p_eps, the optimal p* and the
LP oracle solutions) is stored by its monomial coefficients c_0..c_d, because
the l1 constraint of the extrapolation problem is stated in that basis.

Functions:
    chebyshev_first_kind(k): T_k in the monomial basis.
    rescaled_cheb(rho, eps, k): the minimax polynomial on [-eps, rho] with p(1) = 1.
    l1_norm(p): sum of absolute coefficients.
    max_abs_on_interval(p, a, b): max |p| on [a, b] by dense grid plus bounded refinement.
"""

import math
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial import Polynomial as PowerSeries
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as poly
from scipy.optimize import minimize_scalar

from src.errors import DomainError

MAX_CHEBYSHEV_DEGREE = 64
GRID_POINTS_PER_COEFFICIENT = 64

ArrayLike = Union[float, Iterable[float], np.ndarray]


class Polynomial:
    """Immutable real polynomial stored by monomial coefficients ``c_0..c_d``.

    Trailing exact zeros are trimmed so the leading coefficient is nonzero
    unless the polynomial is the constant zero.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[float]) -> None:
        if not isinstance(coeffs, np.ndarray):
            coeffs = list(coeffs)
        arr = np.array(coeffs, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("a polynomial needs at least one coefficient")
        if not np.all(np.isfinite(arr)):
            raise ValueError("polynomial coefficients must be finite")
        arr = poly.polytrim(arr).copy()
        arr.setflags(write=False)
        self._coeffs = arr

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        return int(self._coeffs.size - 1)

    def __call__(self, x: ArrayLike) -> Union[float, np.ndarray]:
        values = poly.polyval(np.asarray(x, dtype=float), self._coeffs)
        if np.ndim(values) == 0:
            return float(values)
        return values

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self._coeffs)))

    def scaled(self, factor: float) -> "Polynomial":
        return Polynomial(self._coeffs * factor)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(poly.polysub(self._coeffs, other.coeffs))

    def __repr__(self) -> str:
        return f"Polynomial({np.array2string(self._coeffs, precision=6, separator=', ')})"


def chebyshev_first_kind(k: int) -> Polynomial:
    """Return T_k in the monomial basis.

    Raises:
        DomainError: If ``k`` is negative or above 64, where double precision
            coefficients overflow.
    """
    if int(k) != k or k < 0 or k > MAX_CHEBYSHEV_DEGREE:
        raise DomainError(f"Chebyshev degree must be an integer in [0, {MAX_CHEBYSHEV_DEGREE}], got {k}")
    k = int(k)
    return Polynomial(cheb.cheb2poly([0.0] * k + [1.0]))


def rescaled_cheb(rho: float, eps: float, k: int) -> Polynomial:
    """Return p_eps(x) = T_k(2(x+eps)/(rho+eps) - 1) / |T_k(2(1+eps)/(rho+eps) - 1)|.

    p_eps has the minimal maximum absolute value on [-eps, rho] among degree-k
    polynomials with p(1) = 1.

    The normalization happens in the Chebyshev basis, so the monomial
    coefficients meet p(1) = 1 up to about 1e-15 * l1_norm(p).
    """
    if eps < 0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    if rho + eps <= 0:
        raise ValueError(f"rho + eps must be positive, got rho={rho}, eps={eps}")
    if int(k) != k or k < 1 or k > MAX_CHEBYSHEV_DEGREE:
        raise DomainError(f"k must be an integer in [1, {MAX_CHEBYSHEV_DEGREE}], got {k}")

    series = Chebyshev.basis(int(k), domain=[-eps, rho])
    normalizer = abs(float(series(1.0)))
    monomial = series.convert(kind=PowerSeries)
    return Polynomial(monomial.coef / normalizer)


def l1_norm(p: Polynomial) -> float:
    """Return the sum of the absolute values of the monomial coefficients."""
    return p.l1_norm()


def equioscillation_points(rho: float, eps: float, k: int) -> np.ndarray:
    """Return m_i = ((rho+eps)cos(i pi/k) + rho - eps)/2 for i = 0..k (m_0 = rho)."""
    i = np.arange(int(k) + 1)
    return ((rho + eps) * np.cos(i * math.pi / k) + rho - eps) / 2.0


def max_abs_on_interval(
    p: Polynomial,
    a: float,
    b: float,
    grid_size: Optional[int] = None,
    refine_tol: float = 1e-12,
) -> Tuple[float, float]:
    """Return ``(max |p(x)|, argmax)`` over ``[a, b]``.

    A uniform grid locates the candidate maxima (endpoints included); each of
    the largest grid-local maxima is then refined with a bounded scalar search
    on its two neighbouring grid cells.

    Raises:
        ValueError: If ``a >= b`` or the grid is too coarse for the degree.
    """
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    minimum_grid = 2 * (p.degree + 1)
    if grid_size is None:
        grid_size = max(GRID_POINTS_PER_COEFFICIENT * (p.degree + 1), minimum_grid)
    if grid_size < minimum_grid:
        raise ValueError(f"grid_size must be >= {minimum_grid} for degree {p.degree}, got {grid_size}")

    grid = np.linspace(a, b, int(grid_size))
    values = np.abs(p(grid))

    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    local = np.flatnonzero((values >= padded[:-2]) & (values >= padded[2:]))
    candidates = local[np.argsort(values[local])[::-1]][: p.degree + 2]

    best_index = int(np.argmax(values))
    best_value, best_x = float(values[best_index]), float(grid[best_index])

    def negative_abs(x: float) -> float:
        return -abs(p(x))

    for index in candidates:
        lo = grid[max(index - 1, 0)]
        hi = grid[min(index + 1, grid.size - 1)]
        result = minimize_scalar(negative_abs, bounds=(lo, hi), method="bounded", options={"xatol": refine_tol})
        if -result.fun > best_value:
            best_value, best_x = float(-result.fun), float(result.x)

    return best_value, best_x


__all__ = [
    "MAX_CHEBYSHEV_DEGREE",
    "Polynomial",
    "chebyshev_first_kind",
    "equioscillation_points",
    "l1_norm",
    "max_abs_on_interval",
    "rescaled_cheb",
]
