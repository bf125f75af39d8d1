"""Experiment configuration: a flat ``key = value`` file plus ``--key value`` overrides.

Example file::

    # guarded runs on the cubic family
    rho = 0.999
    k = 5
    C = 1e2, 1e3, 1e4
    family = cubic_perturbed_quadratic
    eta = 1e-2
    grad_norm0 = 0.1
    N = 6000

Budgets accept a scalar, a comma-separated list or a sweep
``start:end:count:log|lin``; either end may be ``cstar`` or ``cstar*<factor>``,
resolved against the configured (rho, k).
"""

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.operators import FAMILIES
from src.rates import RateParams, c_star

DEFAULT_SWEEP = "1:cstar*1.05:50:log"
DEFAULT_RUN_BUDGETS = "1e2,1e3,1e4"


def _parse_float(raw: str) -> float:
    value = float(raw)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _parse_int(raw: str) -> int:
    return int(raw)


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _parse_float_list(raw: str) -> Tuple[float, ...]:
    return tuple(_parse_float(item) for item in raw.split(",") if item.strip())


def _parse_int_list(raw: str) -> Tuple[int, ...]:
    return tuple(_parse_int(item) for item in raw.split(",") if item.strip())


def _parse_str(raw: str) -> str:
    return raw.strip()


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "rho": _parse_float_list,
    "k": _parse_int_list,
    "C": _parse_str,
    "M": _parse_int,
    "alpha": _parse_float,
    "eta": _parse_float,
    "L": _parse_float,
    "mu": _parse_float,
    "gamma": _parse_float,
    "grad_norm0": _parse_float,
    "family": _parse_str,
    "seed": _parse_int,
    "n": _parse_int,
    "N": _parse_int,
    "tol": _parse_float,
    "rel_tol": _parse_float,
    "grad_tol": _parse_float,
    "unconstrained": _parse_bool,
    "out": _parse_str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by the CLI commands.

    ``rho`` and ``k`` are tuples so ``rates`` can tabulate several pairs; the
    other commands use a single pair. ``C`` keeps the raw budget spec until
    ``budgets`` resolves it. ``M`` defaults to ``k``.
    """

    rho: Tuple[float, ...] = (0.9,)
    k: Tuple[int, ...] = (5,)
    C: Optional[str] = None
    M: Optional[int] = None
    alpha: float = 0.0
    eta: float = 0.0
    L: float = 1.0
    mu: float = 1e-3
    gamma: Optional[float] = None
    grad_norm0: float = 0.1
    family: str = "cubic_perturbed_quadratic"
    seed: int = 0
    n: int = 100
    N: int = 100
    tol: float = 1e-6
    rel_tol: float = 1e-8
    grad_tol: float = 0.0
    unconstrained: bool = False
    out: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.rho or not self.k:
            raise ValueError("rho and k need at least one value each")
        for rho in self.rho:
            if not 0.0 < rho < 1.0:
                raise ValueError(f"rho must lie in (0, 1), got {rho}")
        for k in self.k:
            if k < 1:
                raise ValueError(f"k must be >= 1, got {k}")
        if self.M is not None and self.M < 1:
            raise ValueError(f"M must be >= 1, got {self.M}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {', '.join(FAMILIES)}, got {self.family!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        for name in ("n", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("tol", "rel_tol", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("alpha", "eta", "grad_norm0", "grad_tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    def single(self) -> RateParams:
        """Return the (rho, k) pair for commands that take exactly one."""
        if len(self.rho) != 1 or len(self.k) != 1:
            raise ValueError("this command takes a single rho and a single k")
        return RateParams(self.rho[0], self.k[0])

    def knot_count(self, k: int) -> int:
        return self.M if self.M is not None else k

    def operator_params(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {"n": self.n, "mu": self.mu, "L": self.L, "eta": self.eta, "lam": self.mu}
        if self.gamma is not None:
            params["gamma"] = self.gamma
        return params


def _parse_endpoint(token: str, budget: float) -> float:
    token = token.strip().lower()
    if token == "cstar":
        return budget
    if token.startswith("cstar*"):
        return budget * _parse_float(token[len("cstar*") :])
    return _parse_float(token)


def parse_budgets(spec: str, params: RateParams) -> List[float]:
    """Resolve a budget spec to the list of C values.

    Raises:
        ValueError: On a malformed spec, a count below 1 or an unknown scale.
    """
    spec = spec.strip()
    if ":" not in spec:
        budget = c_star(params)
        return [_parse_endpoint(item, budget) for item in spec.split(",") if item.strip()]

    parts = spec.split(":")
    if len(parts) != 4:
        raise ValueError(f"sweep must look like start:end:count:log|lin, got {spec!r}")
    budget = c_star(params)
    start, end = _parse_endpoint(parts[0], budget), _parse_endpoint(parts[1], budget)
    count = _parse_int(parts[2])
    scale = parts[3].strip().lower()
    if count < 1:
        raise ValueError(f"sweep count must be >= 1, got {count}")
    if scale == "log":
        if start <= 0 or end <= 0:
            raise ValueError("log sweeps need positive endpoints")
        return [float(v) for v in np.geomspace(start, end, count)]
    if scale == "lin":
        return [float(v) for v in np.linspace(start, end, count)]
    raise ValueError(f"sweep scale must be log or lin, got {parts[3]!r}")


def _read_file(path: Path) -> Dict[str, Tuple[str, str]]:
    entries: Dict[str, Tuple[str, str]] = {}
    for lineno, raw_line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        origin = f"{path}:{lineno}"
        if "=" not in line:
            raise ValueError(f"{origin}: expected 'key = value', got {raw_line.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ValueError(f"{origin}: unknown key {key!r}")
        entries[key] = (value, origin)
    return entries


def parse_overrides(tokens: Sequence[str]) -> Dict[str, str]:
    """Turn ``["--rho", "0.9", "--k=5"]`` into ``{"rho": "0.9", "k": "5"}``.

    Raises:
        ValueError: On a token that is not a flag, a missing value or an unknown key.
    """
    overrides: Dict[str, str] = {}
    index = 0
    while index < len(tokens):
        token = tokens[index]
        if not token.startswith("--"):
            raise ValueError(f"unexpected argument {token!r}")
        name = token[2:]
        if "=" in name:
            name, value = name.split("=", 1)
            index += 1
        else:
            if index + 1 >= len(tokens):
                raise ValueError(f"--{name}: missing value")
            value = tokens[index + 1]
            index += 2
        key = name.replace("-", "_")
        if key not in _PARSERS:
            raise ValueError(f"--{name}: unknown key")
        overrides[key] = value
    return overrides


def load_experiment(path: Optional[Path] = None, overrides: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from an optional file and overrides (overrides win).

    Raises:
        ValueError: Naming the file line or flag of the first bad entry.
    """
    entries = _read_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if key not in _PARSERS:
            raise ValueError(f"--{key}: unknown key")
        entries[key] = (value, f"--{key}")

    known = {f.name for f in fields(ExperimentConfig)}
    values: Dict[str, Any] = {}
    for key, (raw, origin) in entries.items():
        try:
            values[key] = _PARSERS[key](raw)
            # fields are independent, so each one is range-checked against the defaults
            ExperimentConfig(**{key: values[key]})
        except ValueError as exc:
            raise ValueError(f"{origin}: invalid value for {key}: {exc}") from exc

    return ExperimentConfig(**{key: value for key, value in values.items() if key in known})


__all__ = [
    "DEFAULT_RUN_BUDGETS",
    "DEFAULT_SWEEP",
    "ExperimentConfig",
    "load_experiment",
    "parse_budgets",
    "parse_overrides",
]
