"""Figure rendering for study outputs.

Each study's report path renders a PNG next to its CSV so a run directory is
self-contained: the CSV remains the numeric contract, the figure is a quick
visual check.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_fidelity_history",
    "plot_cost_histories",
    "plot_scaling",
]


def plot_fidelity_history(fidelities, path) -> None:
    """Fidelity after each learned layer."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    layers = np.arange(1, len(fidelities) + 1)
    ax.plot(layers, fidelities, "o-")
    ax.set_xlabel("learned layers")
    ax.set_ylabel("fidelity")
    ax.set_ylim(0, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_cost_histories(histories, path) -> None:
    """Per-layer cost trajectories on one axis."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for i, hist in enumerate(histories, start=1):
        ax.plot(np.asarray(hist), label=f"layer {i}", lw=1)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    if len(histories) <= 10:
        ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_scaling(x, series, path, xlabel, ylabel, bound=None) -> None:
    """Log-log scaling plot; ``series`` maps label -> y values, optional bound curve."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in series.items():
        ax.loglog(x, y, "o-", label=str(label))
    if bound is not None:
        ax.loglog(x, bound, "k--", label="bound")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
