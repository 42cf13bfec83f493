"""Report figures written next to the CSV/JSON outputs.

Everything renders through the non-interactive Agg backend so the CLI works
headless.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    # fixed metadata keeps repeated renders byte-stable
    "svg.hashsalt": "dylink2vec",
}

TOPO = ("cn", "aa", "jaccard", "katz", "jack")


def _color(method: str) -> str:
    if method == "dylink2vec":
        return "tab:purple"
    if method.startswith("ts-"):
        return "tab:green"
    if method in TOPO:
        return "tab:blue"
    return "tab:gray"


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def plot_loss_trace(trace: Sequence[float], path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.0, 2.8))
        ax.plot(range(len(trace)), trace, color="tab:purple", lw=1.2)
        ax.set_xlabel("iteration")
        ax.set_ylabel("reconstruction loss J")
        ax.set_yscale("log")
        return _save(fig, path)


def plot_method_comparison(reports: Sequence[dict], path: str | Path) -> Path:
    """Side-by-side bars of PRAUC and NDCG@k per method."""
    methods = [r["method"] for r in reports]
    colors = [_color(m) for m in methods]
    k = reports[0]["k"] if reports else 50
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.0))
        for ax, key, label in zip(axes, ("prauc", "ndcg_k"), ("PRAUC", f"NDCG@{k}")):
            ax.bar(range(len(methods)), [r[key] for r in reports], color=colors)
            ax.set_xticks(range(len(methods)))
            ax.set_xticklabels(methods, rotation=60, ha="right")
            ax.set_ylabel(label)
            ax.set_ylim(0, 1)
        fig.tight_layout()
        return _save(fig, path)


def plot_sweep(rows: Sequence[dict], x_key: str, path: str | Path, xlabel: str | None = None) -> Path:
    """NDCG on the left axis and PRAUC on the right, against ``x_key``."""
    xs = [r[x_key] for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ax.plot(xs, [r["ndcg_k"] for r in rows], "o-", color="tab:blue", label="NDCG")
        ax.set_xlabel(xlabel or x_key)
        ax.set_ylabel("NDCG", color="tab:blue")
        ax2 = ax.twinx()
        ax2.spines["right"].set_visible(True)
        ax2.plot(xs, [r["prauc"] for r in rows], "s--", color="tab:red", label="PRAUC")
        ax2.set_ylabel("PRAUC", color="tab:red")
        ax.set_xticks(xs)
        return _save(fig, path)
