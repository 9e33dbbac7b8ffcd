"""Report figures rendered next to the delimited output files.

Everything draws through the Agg backend and writes PNGs; nothing here is
interactive. Figures are a convenience of the command line layer, the
evaluation itself never depends on them.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .evaluation import EvalReport, GridRow

__all__ = [
    "plot_definitional",
    "plot_chimeras",
    "plot_men",
    "plot_grid",
    "plot_report",
]

_PNG_OPTS = dict(dpi=120, metadata={"Software": None})


def plot_definitional(report: EvalReport, path: str) -> None:
    """Histogram of gold ranks on a log10 scale."""
    ranks = [it.detail for it in report.items]
    fig, ax = plt.subplots(figsize=(6, 4))
    if ranks:
        logs = np.log10(ranks)
        bins = np.linspace(0, max(1.0, float(np.max(logs))) + 0.25, 30)
        ax.hist(logs, bins=bins, color="#3465a4", edgecolor="white")
    ax.set_xlabel("log10 gold rank")
    ax.set_ylabel("instances")
    ax.set_title(
        f"{report.learner}: MRR {report.aggregate:.5f}, "
        f"median rank {report.median_rank}"
    )
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)
    plt.close(fig)


def plot_chimeras(report: EvalReport, path: str) -> None:
    """Histogram of per-trial Spearman correlations."""
    rhos = [it.value for it in report.items]
    fig, ax = plt.subplots(figsize=(6, 4))
    if rhos:
        ax.hist(rhos, bins=np.linspace(-1, 1, 21), color="#73d216", edgecolor="white")
    ax.axvline(report.aggregate, color="#a40000", linestyle="--", label="mean")
    ax.set_xlabel("per-trial Spearman rho")
    ax.set_ylabel("trials")
    ax.set_title(f"{report.learner}: mean rho {report.aggregate:.4f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)
    plt.close(fig)


def plot_men(report: EvalReport, path: str) -> None:
    """System cosine against human score, one point per pair."""
    sys_sims = [it.value for it in report.items]
    human = [it.detail for it in report.items]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(human, sys_sims, s=8, alpha=0.5, color="#3465a4")
    ax.set_xlabel("human score")
    ax.set_ylabel("system cosine")
    ax.set_title(f"similarity benchmark: rho {report.aggregate:.4f}")
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)
    plt.close(fig)


def plot_grid(rows: list[GridRow], path: str, metric_name: str) -> None:
    """Metric per grid cell, in sweep order, best cell marked."""
    metrics = [r.metric if math.isfinite(r.metric) else float("nan") for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(len(metrics)), metrics, lw=0.8, color="#3465a4")
    finite = [(i, m) for i, m in enumerate(metrics) if math.isfinite(m)]
    if finite:
        best_i, best_m = max(finite, key=lambda t: t[1])
        ax.plot([best_i], [best_m], "o", color="#a40000", label=f"best cell {best_i}")
        ax.legend()
    ax.set_xlabel("grid cell")
    ax.set_ylabel(metric_name)
    ax.set_title(f"grid sweep over {len(metrics)} cells")
    fig.tight_layout()
    fig.savefig(path, **_PNG_OPTS)
    plt.close(fig)


def plot_report(report: EvalReport, path: str) -> None:
    if report.kind == "definitional":
        plot_definitional(report, path)
    elif report.kind == "chimeras":
        plot_chimeras(report, path)
    else:
        plot_men(report, path)
