"""Static SVG figures for sweep results (matplotlib, non-interactive backend)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..metrics import MetricReport, summarize  # noqa: E402

# fixed ids and no timestamp, so identical results give identical files
matplotlib.rcParams["svg.hashsalt"] = "babblereach"
_META = {"Date": None, "Creator": None}

METRICS = (("norm_jerk", "norm jerk"), ("ee_error", "end-effector error [m]"))


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def box_plot(result, path):
    """One box per swept value for each metric."""
    labels = result.values()
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for ax, (col, title) in zip(axes, METRICS):
        data = [result.column(col, v) for v in labels]
        data = [d if d.size else np.array([np.nan]) for d in data]
        ax.boxplot(data, showfliers=True)
        ax.set_xticks(range(1, len(labels) + 1), labels)
        ax.set_xlabel(result.kind)
        ax.set_ylabel(title)
    fig.tight_layout()
    return _save(fig, path)


def by_goal_y_plot(result, path, n_bins=10):
    """Mean and standard deviation of each metric against the goal's y coordinate."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    for value in result.values():
        reports = [MetricReport(r.norm_jerk, r.ee_error, r.goal_y) for r in result.rows
                   if r.param_value == value and np.isfinite(r.norm_jerk)]
        if not reports:
            continue
        bins = summarize(reports, n_bins)["by_goal_y"]
        y = np.array([(b["y_lo"] + b["y_hi"]) / 2 for b in bins])
        for ax, key in zip(axes, ("norm_jerk", "ee_error")):
            m = np.array([b[f"{key}_mean"] for b in bins])
            s = np.array([b[f"{key}_std"] for b in bins])
            ax.plot(y, m, marker="o", ms=3, label=f"{result.kind}={value}")
            ax.fill_between(y, m - s, m + s, alpha=0.2)
    for ax, (_, title) in zip(axes, METRICS):
        ax.set_xlabel("goal y [m]")
        ax.set_ylabel(title)
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(result, out_dir):
    out = Path(out_dir)
    return [box_plot(result, out / f"{result.kind}_box.svg"),
            by_goal_y_plot(result, out / f"{result.kind}_by_goal_y.svg")]
