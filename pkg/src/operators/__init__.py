"""Seeded fixed-point operators with known contraction constants."""

from .zoo import (
    FAMILIES,
    OperatorSpec,
    alpha_gradient,
    audit_contractivity,
    empirical_lipschitz,
    fixed_point_residual_map,
    initial_point,
    make_gradient_step,
    make_linear,
    make_perturbed_linear,
)

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
