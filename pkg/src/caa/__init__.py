"""Constrained Anderson acceleration steps and the guarded outer loop."""

from .runner import (
    EXTRAPOLATED,
    FALLBACK,
    UNCONSTRAINED_BUDGET,
    CaaConfig,
    OuterRecord,
    RunTrace,
    StepTrace,
    caa_step,
    guarded_caa,
    residual,
)

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
