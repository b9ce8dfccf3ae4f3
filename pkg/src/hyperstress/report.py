"""Report emission: per-experiment CSV, a summary record, and log-log figures.

Output is byte-deterministic for fixed inputs: floats are written with 17
significant digits, rows keep a fixed order, and figures carry no
timestamps.  The CSV files are the machine contract; the figures mirror
the rate fits for eyeballing.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import RateReport  # noqa: E402

__all__ = ["format_float", "report_csv_text", "summary_text", "emit_reports", "render_figure"]


def format_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    return str(value)


HEADER = "experiment,parameter,measured,reference,residual,slope,pass"


def report_csv_text(report: RateReport, seed: int) -> str:
    lines = [f"# seed={seed}", HEADER]
    n = len(report.params)
    for i in range(n):
        ref = report.reference[i] if report.reference is not None else None
        if report.residuals is not None:
            resid = report.residuals[i]
        elif ref is not None:
            resid = abs(report.measured[i] - ref)
        else:
            resid = report.measured[i]
        row = [
            report.name,
            _cell(report.params[i]),
            format_float(report.measured[i]),
            format_float(ref) if ref is not None else "",
            format_float(resid),
            format_float(report.slope) if report.slope is not None else "",
            _cell(report.passed),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_text(reports: list[RateReport], seed: int, tolerance_scale: float) -> str:
    lines = [
        f"# seed={seed} tolerance_scale={format_float(tolerance_scale)}",
        "experiment,pass,slope,expected_slope,slope_tol,threshold,max_measured,notes",
    ]
    for r in reports:
        notes = ";".join(f"{k}={_cell(v)}" for k, v in sorted(r.notes.items()) if isinstance(v, (bool, int, float, str)))
        lines.append(
            ",".join(
                [
                    r.name,
                    _cell(r.passed),
                    format_float(r.slope) if r.slope is not None else "",
                    format_float(r.expected_slope) if r.expected_slope is not None else "",
                    format_float(r.slope_tol) if r.slope_tol is not None else "",
                    format_float(r.threshold) if r.threshold is not None else "",
                    format_float(max(r.measured)) if r.measured else "",
                    notes.replace(",", ";"),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def render_figure(report: RateReport, path: str) -> bool:
    """Log-log plot of measured against the parameter; skipped when not plottable."""
    params = report.params
    if len(params) < 2 or not all(isinstance(p, (int, float)) for p in params):
        return False
    if not all(v > 0.0 for v in report.measured) or not all(p > 0 for p in params):
        return False
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.loglog(params, report.measured, "ko", ms=5, label="measured")
    if report.slope is not None and report.intercept is not None:
        xs = np.array([min(params), max(params)], dtype=float)
        ax.loglog(xs, np.exp(report.intercept) * xs**report.slope, "k--", lw=1, label=f"slope {report.slope:.3f}")
    if report.reference is not None and all(v > 0 for v in report.reference):
        ax.loglog(params, report.reference, "r:", lw=1, label="reference")
    ax.set_xlabel(report.param_name)
    ax.set_ylabel("measured")
    ax.set_title(report.name)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    return True


def emit_reports(reports: list[RateReport], outdir: str, seed: int, tolerance_scale: float = 1.0, figures: bool = True) -> list[str]:
    """Write one CSV per report, a summary CSV, and figures; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for r in reports:
        path = os.path.join(outdir, f"{r.name}.csv")
        with open(path, "w", newline="\n") as fh:
            fh.write(report_csv_text(r, seed))
        paths.append(path)
        if figures:
            figpath = os.path.join(outdir, f"{r.name}.png")
            if render_figure(r, figpath):
                paths.append(figpath)
    summary = os.path.join(outdir, "summary.csv")
    with open(summary, "w", newline="\n") as fh:
        fh.write(summary_text(reports, seed, tolerance_scale))
    paths.append(summary)
    return paths
