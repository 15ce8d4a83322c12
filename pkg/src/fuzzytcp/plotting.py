"""Figures written next to the CLI's delimited output.

Uses the object-oriented matplotlib API so nothing touches pyplot's global
state or needs a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .evaluation import EvaluationReport
from .fuzzy_core import LinguisticVariable
from .inference import Engine, InferenceTrace


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    return path


def _draw_variable(ax, var: LinguisticVariable, marker: float | None = None) -> None:
    xs = np.linspace(var.universe[0], var.universe[1], 1201)
    for t in var.terms:
        ax.plot(xs, t.mf(xs), label=t.label, lw=1.4)
    if marker is not None:
        ax.axvline(marker, color="k", ls="--", lw=1)
    ax.set_xlim(*var.universe)
    ax.set_ylim(0, 1.05)
    unit = f" ({var.unit})" if var.unit else ""
    ax.set_xlabel(var.name + unit)
    ax.set_ylabel("membership")
    ax.legend(fontsize=7, loc="upper right")


def plot_variable(var: LinguisticVariable, path) -> Path:
    fig = Figure(figsize=(6, 3.2))
    _draw_variable(fig.add_subplot(1, 1, 1), var)
    return _save(fig, path)


def plot_inference(trace: InferenceTrace, engine: Engine, path) -> Path:
    """One panel per input with the crisp value marked, plus the aggregate."""
    n = len(trace.inputs) + 1
    fig = Figure(figsize=(4.2 * n, 3.4))
    for i, (name, x) in enumerate(trace.inputs.items(), 1):
        ax = fig.add_subplot(1, n, i)
        _draw_variable(ax, engine.variables[name], marker=x)
        ax.set_title(f"{name} = {x:g}")
    ax = fig.add_subplot(1, n, n)
    out = engine.output_variable
    xs = np.linspace(out.universe[0], out.universe[1], 1201)
    for t in out.terms:
        ax.plot(xs, t.mf(xs), color="0.7", lw=0.8)
    agg = trace.aggregate(xs)
    ax.fill_between(xs, agg, color="tab:orange", alpha=0.6, label="aggregate")
    ax.axvline(trace.crisp_output, color="k", lw=1.5, label=f"centroid {trace.crisp_output:.2f}")
    ax.set_xlim(*out.universe)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(out.name + (f" ({out.unit})" if out.unit else ""))
    ax.set_title(f"{out.name} = {trace.crisp_output:.2f} ({trace.output_term})")
    ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    return _save(fig, path)


def plot_discovery(reports: Sequence[EvaluationReport], path) -> Path:
    """Failures found against cumulative execution time, one step curve per plan."""
    fig = Figure(figsize=(6, 3.6))
    ax = fig.add_subplot(1, 1, 1)
    for r in reports:
        ts = [0] + [t for t, _ in r.discovery]
        ks = [0] + [k for _, k in r.discovery]
        ax.step(ts, ks, where="post", label=r.label)
    ax.set_xlabel("cumulative execution time (s)")
    ax.set_ylabel("failures found")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)
