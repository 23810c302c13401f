"""Sweep artifacts: the per-(lambda, omega) summary table and figures.

The summary is a fixed-width text table with one row per sweep cell listing
iterations, final error norms, and the worst slack of every theorem check;
figures are semilog convergence plots written next to the CSVs.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .iteration import ConvergenceReport

__all__ = ["CellResult", "cell_tag", "emit_summary", "render_cell_figure", "render_overview"]


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (lambda, omega) sweep cell: a report or an error."""

    lam: float
    omega: float
    report: ConvergenceReport | None = None
    error: str | None = None


def cell_tag(lam: float, omega: float) -> str:
    """Filesystem tag for one sweep cell, e.g. ``lam1_om0.25``."""
    return f"lam{lam:g}_om{omega:g}"


_COLUMNS = (
    ("lambda", 9),
    ("omega", 9),
    ("status", 10),
    ("iters", 6),
    ("dwz_l2", 13),
    ("dxu_l2", 13),
    ("sup_err", 13),
    ("yext_err", 13),
    ("epsilon", 13),
    ("w_monotone", 13),
    ("w_domination", 13),
    ("w_b", 13),
    ("w_c", 13),
    ("w_psop", 13),
    ("ok", 5),
)


def _cell(value, width: int) -> str:
    if value is None:
        return "-".rjust(width)
    if isinstance(value, bool):
        return ("true" if value else "false").rjust(width)
    if isinstance(value, float):
        return f"{value:.6e}".rjust(width)
    return str(value).rjust(width)


def emit_summary(cells: list[CellResult]) -> str:
    """Render the sweep summary table; header only for an empty sweep."""
    header = "  ".join(name.rjust(width) for name, width in _COLUMNS)
    lines = [header]
    for cell in cells:
        if cell.report is None:
            row = [
                _cell(cell.lam, 9),
                _cell(cell.omega, 9),
                _cell("error", 10),
            ]
            lines.append("  ".join(row) + "  " + (cell.error or "unknown failure"))
            continue
        rep = cell.report
        final = rep.final_row()
        values = (
            cell.lam,
            cell.omega,
            rep.status,
            rep.iterations,
            final.dwz_l2,
            final.dxu_l2,
            final.sup_err,
            final.yext_err,
            rep.epsilon if not rep.epsilon_vacuous else None,
            rep.worst_slack("monotone"),
            rep.worst_slack("domination"),
            rep.worst_slack("b"),
            rep.worst_slack("c"),
            rep.worst_slack("psop"),
            rep.all_checks_ok(),
        )
        lines.append("  ".join(_cell(v, w) for v, (_, w) in zip(values, _COLUMNS)))
    return "\n".join(lines) + "\n"


def _series(report: ConvergenceReport, name: str):
    ks, vals = [], []
    for row in report.rows:
        value = getattr(row, name)
        if value is not None and value > 0.0:
            ks.append(row.k)
            vals.append(value)
    return ks, vals


def render_cell_figure(report: ConvergenceReport, path: str) -> None:
    """Semilog convergence curves for one sweep cell."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, label in (
        ("dwz_l2", "shadow error"),
        ("dwz_w", "shadow error (weighted)"),
        ("dxu_l2", "pair error"),
        ("sup_err", "state sup error"),
        ("yext_err", "external output error"),
    ):
        ks, vals = _series(report, name)
        if ks:
            ax.semilogy(ks, vals, label=label)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("error norm")
    ax.set_title(f"lambda = {report.lam:g}, omega = {report.omega:g}  [{report.status}]")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def render_overview(cells: list[CellResult], path: str) -> None:
    """One axes comparing the shadow-error decay of every sweep cell."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    plotted = False
    for cell in cells:
        if cell.report is None:
            continue
        ks, vals = _series(cell.report, "dwz_l2")
        if ks:
            ax.semilogy(ks, vals, label=cell_tag(cell.lam, cell.omega))
            plotted = True
    ax.set_xlabel("iteration k")
    ax.set_ylabel("shadow error")
    ax.set_title("sweep overview")
    ax.grid(True, which="both", alpha=0.3)
    if plotted:
        ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
