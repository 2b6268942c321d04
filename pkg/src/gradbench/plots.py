"""Validation-loss charts rendered from a results CSV.

Emits one SVG per optimizer (all of its grid cells as curves on a log
loss axis, diverged runs truncated and marked with an x at their last
finite point) plus three comparison charts: the constant-lr family, the
adaptive-lr family, and adam vs nesterov.
"""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import CsvRow, read_csv

CONSTANT_LR_FAMILY = ("sgd", "momentum", "nag")
ADAPTIVE_LR_FAMILY = ("adagrad", "rmsprop", "adadelta", "adam")
COMPARISON_CHARTS = (
    ("constant_lr", CONSTANT_LR_FAMILY, "Validation MSE, constant-lr optimizers"),
    ("adaptive_lr", ADAPTIVE_LR_FAMILY, "Validation MSE, adaptive-lr optimizers"),
    ("adam_vs_nesterov", ("adam", "nag"), "Validation MSE, adam vs nesterov"),
)


def _curve_label(rows: list[CsvRow]) -> str:
    first = rows[0]
    label = f"lr={first.lr:g} b={first.batch_size}"
    if first.momentum is not None:
        label += f" m={first.momentum:g}"
    return label


def _draw_runs(ax, runs: dict[str, list[CsvRow]]) -> None:
    for run_id in sorted(runs):
        rows = sorted(runs[run_id], key=lambda r: r.epoch)
        pts = [(r.epoch, r.val_loss) for r in rows if math.isfinite(r.val_loss)]
        diverged = any(r.diverged for r in rows)
        if pts:
            xs, ys = zip(*pts)
            (line,) = ax.plot(xs, ys, linewidth=0.9, label=_curve_label(rows))
            if diverged:
                ax.plot(xs[-1], ys[-1], "x", color=line.get_color(), markersize=7)
        elif diverged:
            # no finite point at all; mark the divergence at epoch 1
            ax.plot([rows[0].epoch], [1.0], "x", color="red", markersize=7)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation MSE")
    ax.grid(True, alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=7, ncols=2, loc="upper right")


def plot_curves(
    csv_path: str | Path, out_dir: str | Path, group_by: str = "optimizer"
) -> list[Path]:
    """Render charts for a results CSV; returns the files written."""
    if group_by != "optimizer":
        raise ValueError(f"unsupported group_by {group_by!r}")
    rows = read_csv(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    by_optimizer: dict[str, dict[str, list[CsvRow]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        by_optimizer[row.optimizer][row.run_id].append(row)

    written = []
    for optimizer in sorted(by_optimizer):
        fig, ax = plt.subplots(figsize=(9, 6))
        _draw_runs(ax, by_optimizer[optimizer])
        ax.set_title(f"Validation MSE, {optimizer}")
        path = out_dir / f"{optimizer}.svg"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    for name, family, title in COMPARISON_CHARTS:
        members = [opt for opt in family if opt in by_optimizer]
        if not members:
            continue
        fig, axes = plt.subplots(
            1, len(members), figsize=(6 * len(members), 5), squeeze=False
        )
        for ax, optimizer in zip(axes[0], members):
            _draw_runs(ax, by_optimizer[optimizer])
            ax.set_title(optimizer)
        fig.suptitle(title)
        path = out_dir / f"{name}.svg"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
