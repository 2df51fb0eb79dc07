"""Figure rendering for experiment reports.

Renders the standard report plots next to the CSV outputs: box plots of the
adaptive cost distribution against the non-adaptive reference line, and
scatter plots of the order score D against a cost metric with a least-squares
regression line.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

METRIC_LABELS = {
    "rounds": "Number of rounds",
    "total_resets": "Total number of resets",
    "total_symbols": "Total number of input symbols",
    "mq_resets": "MQ resets",
    "mq_symbols": "MQ input symbols",
    "eq_resets": "EQ resets",
    "eq_symbols": "EQ input symbols",
}


def _label(metric: str) -> str:
    return METRIC_LABELS.get(metric, metric)


def boxplot_vs_reference(values, reference, metric, path, title=None) -> None:
    """Adaptive distribution as a box plot, non-adaptive as a line."""
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    ax.boxplot([values], widths=0.45, patch_artist=True,
               boxprops={"facecolor": "#aec7e8"}, medianprops={"color": "#1f4e79"})
    ax.axhline(reference, color="#d62728", linewidth=1.4,
               label="non-adaptive")
    ax.set_xticks([1])
    ax.set_xticklabels(["adaptive"])
    ax.set_ylabel(_label(metric))
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def grouped_boxplot(groups: dict[str, list[float]], metric, path, title=None) -> None:
    """Side-by-side box plots, one per labeled group (order-effect view)."""
    labels = list(groups)
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.boxplot([groups[label] for label in labels], tick_labels=labels,
               patch_artist=True, boxprops={"facecolor": "#aec7e8"},
               medianprops={"color": "#1f4e79"})
    ax.set_ylabel(_label(metric))
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scatter_with_regression(xs, ys, metric, path, xlabel="Order score D") -> None:
    """Scatter of (D, metric) with the least-squares regression line."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    slope = (
        sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
        if sxx
        else 0.0
    )
    intercept = mean_y - slope * mean_x
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    ax.scatter(xs, ys, s=14, color="#1f77b4", alpha=0.75)
    lo, hi = min(xs), max(xs)
    ax.plot([lo, hi], [slope * lo + intercept, slope * hi + intercept],
            color="#d62728", linewidth=1.4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(_label(metric))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
