"""Figures rendered next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.bbox": "tight",
}


def plot_convergence(report, path, title=None):
    """Objective and primal residual versus iteration, log-scaled."""
    it = np.arange(1, len(report.objective_trace) + 1)
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3))
        ax1.plot(it, report.objective_trace, lw=1.2, color="C0")
        ax1.set_xlabel("iteration")
        ax1.set_ylabel("objective")
        ax1.set_yscale("log")
        ax2.plot(it, report.primal_residual_trace, lw=1.2, color="C3")
        ax2.set_xlabel("iteration")
        ax2.set_ylabel(r"$\|C - Z\|_F$")
        ax2.set_yscale("log")
        if title:
            fig.suptitle(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_confusion(cm, path, title=None, normalize=True):
    """Row-normalized confusion matrix heatmap; rows are true classes."""
    cm = np.asarray(cm, dtype=float)
    shown = cm / np.maximum(cm.sum(axis=1, keepdims=True), 1) if normalize else cm
    n = cm.shape[0]
    size = min(2.5 + 0.35 * n, 12)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(size, size))
        im = ax.imshow(shown, cmap="Blues", vmin=0, vmax=1 if normalize else None)
        ax.set_xlabel("predicted class")
        ax.set_ylabel("true class")
        if n <= 20:
            ax.set_xticks(range(n))
            ax.set_yticks(range(n))
            for i in range(n):
                for j in range(n):
                    if cm[i, j]:
                        ax.text(j, i, f"{shown[i, j]:.2f}" if normalize else int(cm[i, j]),
                                ha="center", va="center", fontsize=7,
                                color="white" if shown[i, j] > 0.5 * shown.max() else "black")
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def render_report(result, out_dir):
    out_dir = Path(out_dir)
    paths = [plot_confusion(result.confusion, out_dir / "confusion.png",
                            title=f"{result.method.upper()} mean accuracy {result.mean_accuracy:.3f}")]
    for r in result.repeats:
        if r.fit_report is not None:
            paths.append(plot_convergence(r.fit_report, out_dir / f"convergence_r{r.repeat}.png",
                                          title=f"repeat {r.repeat}"))
    return paths
