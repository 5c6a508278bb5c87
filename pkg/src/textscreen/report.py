"""Report artifacts: canonical JSON, delimited CSVs, and rendered figures.

JSON is written with sorted keys and a fixed layout so reruns are
byte-comparable; the creation timestamp is isolated to the single
``created_at`` key. Figures are self-contained SVGs: the pooled ROC
staircase and a confusion-matrix grid.
"""

from __future__ import annotations

import csv
import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def write_report_json(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_confusion_csv(confusion: dict, path) -> None:
    """One ``tp,fp,tn,fn`` row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tp", "fp", "tn", "fn"])
        writer.writerow([confusion["tp"], confusion["fp"], confusion["tn"], confusion["fn"]])


def write_roc_csv(roc_points, path) -> None:
    """``fpr,tpr,threshold`` rows; the (0,0) point carries threshold inf."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr", "threshold"])
        for fpr, tpr, threshold in roc_points:
            if threshold is None or math.isinf(threshold):
                value = "inf"
            else:
                value = format(float(threshold), ".9g")
            writer.writerow([format(float(fpr), ".9g"), format(float(tpr), ".9g"), value])


def render_roc_figure(roc_points, auc: float | None, path) -> None:
    """Plot the ROC staircase with the chance diagonal."""
    fprs = [float(p[0]) for p in roc_points]
    tprs = [float(p[1]) for p in roc_points]
    fig, ax = plt.subplots(figsize=(5, 5))
    label = "ROC" if auc is None else f"ROC (AUC = {auc:.3f})"
    ax.step(fprs, tprs, where="post", label=label)
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=1, label="chance")
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right")
    ax.set_title("Receiver operating characteristic")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def render_confusion_figure(confusion: dict, path) -> None:
    """Draw the 2x2 tally: rows actual, columns predicted."""
    grid = [
        [confusion["tp"], confusion["fn"]],
        [confusion["fp"], confusion["tn"]],
    ]
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(grid, cmap="Blues")
    for row in range(2):
        for col in range(2):
            peak = max(max(r) for r in grid)
            color = "white" if grid[row][col] > peak / 2 else "black"
            ax.text(col, row, str(grid[row][col]), ha="center", va="center", color=color)
    ax.set_xticks([0, 1], labels=["diagnosed", "control"])
    ax.set_yticks([0, 1], labels=["diagnosed", "control"])
    ax.set_xlabel("Predicted")
    ax.set_ylabel("Actual")
    ax.set_title("Confusion matrix")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
