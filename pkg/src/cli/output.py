"""CSV emission and optional static plots for CLI tables."""

import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional, Sequence

LOGGER = logging.getLogger(__name__)


@dataclass
class Table:
    """Rows produced by a command; ``failed`` marks a numerical failure or a fired invariant flag."""

    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    failed: bool = False


def format_value(value: Any) -> str:
    """Format a cell: floats with 17 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_csv(table: Table, out: Optional[Path] = None) -> None:
    """Write the table to ``out`` (UTF-8, LF line endings) or to stdout."""
    text = render_csv(table)
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    LOGGER.info("Wrote %s rows to %s", len(table.rows), out)


def _column(table: Table, name: str) -> List[Optional[float]]:
    index = table.columns.index(name)
    return [row[index] if isinstance(row[index], float) else None for row in table.rows]


def _series(xs: Sequence[Any], ys: Sequence[Optional[float]]):
    pairs = [(x, y) for x, y in zip(xs, ys) if y is not None and x is not None]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _plot_chebsolve(table: Table, axes) -> None:
    budgets = _column(table, "C")
    styles = [
        ("rho_tilde_lp", "LP oracle", "tab:blue"),
        ("prop5_bound", "piecewise bound", "tab:red"),
        ("lemma1_chord", "convexity chord", "tab:purple"),
        ("proj_bound", "projection bound", "tab:green"),
        ("lemma2_bound", "small-C closed form", "black"),
        ("hat_rho_grad_Mk", "gradient-step bound, M knots", "tab:orange"),
        ("hat_rho_grad_M1", "gradient-step bound, one knot", "tab:brown"),
    ]
    for column, label, colour in styles:
        xs, ys = _series(budgets, _column(table, column))
        if xs:
            axes.plot(xs, ys, label=label, color=colour)
    ceiling = [value for value in _column(table, "rho_pow_k") if value is not None]
    if ceiling:
        axes.set_ylim(0.0, 1.05 * max(ceiling))
    axes.set_xscale("log")
    axes.set_xlabel("C")
    axes.set_ylabel("rate")


def _plot_run(table: Table, axes) -> None:
    budgets = sorted({row[0] for row in table.rows})
    iters = table.columns.index("outer_iter")
    norms = table.columns.index("grad_norm")
    reference = table.columns.index("rho_kN")
    for budget in budgets:
        rows = [row for row in table.rows if row[0] == budget]
        axes.plot([row[iters] for row in rows], [row[norms] for row in rows], label=f"C={budget:g}")
    if budgets:
        rows = [row for row in table.rows if row[0] == budgets[0]]
        axes.plot([row[iters] for row in rows], [row[reference] for row in rows], "k--", label="rho^(kN)")
    axes.set_yscale("log")
    axes.set_xlabel("outer iteration")
    axes.set_ylabel("gradient norm")


_PLOTTERS = {"chebsolve": _plot_chebsolve, "run": _plot_run}


def write_plot(table: Table, path: Path) -> Optional[Path]:
    """Render a static plot of ``table`` to ``path``; returns None for tables without a plot."""
    plotter = _PLOTTERS.get(table.name)
    if plotter is None:
        LOGGER.info("No plot defined for %s output", table.name)
        return None

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(figsize=(6.4, 4.8))
    try:
        plotter(table, axes)
        axes.legend()
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
    finally:
        plt.close(fig)
    LOGGER.info("Wrote plot to %s", path)
    return path


__all__ = ["Table", "format_value", "render_csv", "write_csv", "write_plot"]
