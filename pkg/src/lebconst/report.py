"""Plot-ready text files and rendered figures for study outputs.

Studies emit plain whitespace-delimited data files next to the CSV so any
plotting tool can consume them; the same data is also rendered to PNG with
matplotlib (Agg backend, no display needed).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import FitResult, MeasurementRecord, RatioTable, _design_row


def _finite(records: Sequence[MeasurementRecord]) -> List[MeasurementRecord]:
    return [r for r in records if math.isfinite(r.value)]


def _abscissa(r: MeasurementRecord) -> int:
    return r.scale if r.scale > 0 else max(r.nvec, default=0) or 1


def write_plot_data(path, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    """Whitespace-delimited columns with a single '#' header line."""
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(format(float(v), ".12g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_study_data(path, records: Sequence[MeasurementRecord]) -> None:
    rows = [(_abscissa(r), r.value, r.error) for r in _finite(records)]
    write_plot_data(path, ("scale", "value", "error"), rows)


def write_ratio_data(path, table: RatioTable) -> None:
    rows = [(row.scale, row.lower, row.upper) for row in table.rows]
    write_plot_data(path, ("scale", "lower_ratio", "upper_ratio"), rows)


def _fit_curve(fit: FitResult, records: Sequence[MeasurementRecord]):
    xs, ys = [], []
    for r in records:
        row = _design_row(fit.model, r)
        if row is None:
            continue
        xs.append(_abscissa(r))
        ys.append(sum(c * v for c, v in zip(fit.coefficients, row)))
    return xs, ys


def render_study_figure(
    path,
    records: Sequence[MeasurementRecord],
    label: str,
    fit: Optional[FitResult] = None,
) -> None:
    recs = _finite(records)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    if recs:
        xs = [_abscissa(r) for r in recs]
        ax.errorbar(
            xs,
            [r.value for r in recs],
            yerr=[r.error if math.isfinite(r.error) else 0.0 for r in recs],
            fmt="o-",
            ms=3.5,
            lw=1.0,
            capsize=2,
            label="measured",
        )
        if fit is not None:
            fx, fy = _fit_curve(fit, recs)
            if fx:
                ax.plot(fx, fy, "--", lw=1.0, label=f"{fit.model} fit")
        ax.set_xscale("log", base=2)
        ax.legend(fontsize=8)
    p = recs[0].p if recs else 0.0
    ax.set_xlabel("scale n")
    ax.set_ylabel(f"L_{p:g}")
    ax.set_title(label, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_ratio_figure(path, table: RatioTable, label: str) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    xs = [row.scale for row in table.rows]
    ax.plot(xs, [row.lower for row in table.rows], "o-", ms=3.5, lw=1.0,
            label="L / prod log(m+1)")
    ax.plot(xs, [row.upper for row in table.rows], "s-", ms=3.5, lw=1.0,
            label="L / (s prod log(n+1))")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("scale n")
    ax.set_ylabel("ratio")
    ax.set_title(label, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
