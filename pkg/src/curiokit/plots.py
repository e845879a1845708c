"""Training-curve figures: one line per agent with a 1-sigma band across
seeds, from the metrics.csv files of finished runs."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import yaml

from .metrics import read_metrics

METRIC_COLUMNS = {
    "reward": "mean_extrinsic_reward",
    "feature_std": "feature_std",
}


class PlotError(ValueError):
    pass


def _run_agent(run_dir):
    cfg_path = Path(run_dir) / "config.yaml"
    if not cfg_path.exists():
        raise PlotError(f"{run_dir} has no config.yaml; not a run directory?")
    with open(cfg_path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    return data["agent"]


def emit_plot(run_dirs, metric, out_path, title=None):
    """Plot one metric over rollouts, grouped by agent kind, with the
    mean line and a 1-sigma band across seeds."""
    if metric not in METRIC_COLUMNS:
        raise PlotError(
            f"unknown metric {metric!r}; known metrics: {sorted(METRIC_COLUMNS)}"
        )
    if not run_dirs:
        raise PlotError("no run directories given")
    column = METRIC_COLUMNS[metric]

    groups = {}
    for run_dir in run_dirs:
        metrics_path = Path(run_dir) / "metrics.csv"
        if not metrics_path.exists():
            raise PlotError(f"{run_dir} has no metrics.csv")
        columns = read_metrics(metrics_path)
        if not columns["rollout_idx"]:
            raise PlotError(f"{metrics_path} has no data rows")
        agent = _run_agent(run_dir)
        xs = np.array(columns["rollout_idx"], dtype=float)
        ys = np.array(
            [np.nan if v is None else v for v in columns[column]], dtype=float
        )
        groups.setdefault(agent, []).append((xs, ys))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    seeds_per_group = set()
    for agent in sorted(groups):
        runs = groups[agent]
        length = min(len(xs) for xs, _ in runs)
        xs = runs[0][0][:length]
        ys = np.stack([y[:length] for _, y in runs])
        mean = np.nanmean(ys, axis=0)
        std = np.nanstd(ys, axis=0)
        seeds_per_group.add(len(runs))
        (line,) = ax.plot(xs, mean, label=agent)
        ax.fill_between(xs, mean - std, mean + std, alpha=0.2, color=line.get_color())
    ax.set_xlabel("rollouts")
    ax.set_ylabel(column)
    seeds = "/".join(str(s) for s in sorted(seeds_per_group))
    ax.set_title(title or f"{metric} (mean ± 1σ over {seeds} seeds)")
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
