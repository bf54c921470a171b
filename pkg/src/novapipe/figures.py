"""Render evaluation figures to files for the CLI report path."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import EvaluationReport

FIG_DPI = 120


def save_confusion_heatmap(report: EvaluationReport, path) -> Path:
    cm = report.confusion
    counts = np.array(cm.counts, dtype=float)
    k = len(cm.labels)
    fig, ax = plt.subplots(figsize=(max(4, 0.8 * k + 2),) * 2)
    image = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(k), cm.labels, rotation=45, ha="right")
    ax.set_yticks(range(k), cm.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title("Confusion matrix")
    threshold = counts.max() / 2 if counts.size else 0
    for i in range(k):
        for j in range(k):
            color = "white" if counts[i, j] > threshold else "black"
            ax.text(j, i, int(counts[i, j]), ha="center", va="center", color=color)
    fig.colorbar(image, ax=ax, fraction=0.046)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def save_per_class_f1(report: EvaluationReport, path) -> Path:
    labels = list(report.confusion.labels)
    f1s = [report.per_class[lab].f1 for lab in labels]
    fig, ax = plt.subplots(figsize=(max(4, 0.8 * len(labels) + 2), 3.5))
    ax.bar(range(len(labels)), f1s, color="#4878a8")
    ax.axhline(report.macro_f1, color="#b04848", linestyle="--", linewidth=1,
               label=f"macro F1 = {report.macro_f1:.2f}")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("Per-class F1")
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def save_stage_f1(report: EvaluationReport, path) -> Path:
    """Bar chart of per-stage macro F1 for a cascade report."""
    stages = report.stage_reports or ()
    names = [f"stage {i}\n{r.confusion.labels[0]}" for i, r in enumerate(stages)]
    values = [r.macro_f1 for r in stages]
    fig, ax = plt.subplots(figsize=(max(4, 1.1 * len(stages) + 2), 3.5))
    ax.bar(range(len(stages)), values, color="#6a9a58")
    ax.set_xticks(range(len(stages)), names)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("stage macro F1")
    ax.set_title("Cascade stage performance")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def write_metrics_csv(report: EvaluationReport, path) -> Path:
    """Delimited per-class metrics plus overall rows."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["class", "precision", "recall", "f1", "support"])
        for lab in report.confusion.labels:
            m = report.per_class[lab]
            writer.writerow([lab, f"{m.precision:.6f}", f"{m.recall:.6f}",
                             f"{m.f1:.6f}", m.support])
        writer.writerow(["__accuracy__", "", "", f"{report.accuracy:.6f}",
                         report.confusion.total])
        writer.writerow(["__macro_f1__", "", "", f"{report.macro_f1:.6f}", ""])
        writer.writerow(["__weighted_f1__", "", "", f"{report.weighted_f1:.6f}", ""])
    return path


def write_confusion_csv(report: EvaluationReport, path) -> Path:
    cm = report.confusion
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["true\\pred", *cm.labels])
        for lab, row in zip(cm.labels, cm.counts):
            writer.writerow([lab, *row])
    return path


def render_report_files(report: EvaluationReport, out_dir) -> list[Path]:
    """Write the delimited outputs and figures for one evaluation report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_metrics_csv(report, out / "metrics.csv"),
        write_confusion_csv(report, out / "confusion.csv"),
        save_confusion_heatmap(report, out / "confusion.png"),
        save_per_class_f1(report, out / "per_class_f1.png"),
    ]
    if report.stage_reports:
        written.append(save_stage_f1(report, out / "stage_f1.png"))
    return written
