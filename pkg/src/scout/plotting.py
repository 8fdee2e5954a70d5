"""Figure rendering for the report paths (bench scaling, loss curves, ablations).

Figures are written next to their CSVs with matplotlib's Agg backend, so
no display is needed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {"scout": "tab:blue", "full": "tab:red", "swa": "tab:green"}


def save_bench_figure(rows, path) -> str:
    """Three panels: score dots (log-log), cache entries, wall time."""
    variants = sorted({r.variant for r in rows}, key=lambda v: list(_COLORS).index(v))
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for variant in variants:
        sub = sorted((r for r in rows if r.variant == variant), key=lambda r: r.n)
        ns = [r.n for r in sub]
        color = _COLORS.get(variant)
        axes[0].loglog(ns, [r.score_dots for r in sub], "o-", label=variant, color=color)
        axes[1].plot(ns, [r.cache_entries for r in sub], "o-", label=variant, color=color)
        axes[2].plot(ns, [r.wall_ms for r in sub], "o-", label=variant, color=color)
    axes[0].set(xlabel="sequence length", ylabel="score dot products / layer",
                title="attention compute")
    axes[1].set(xlabel="sequence length", ylabel="cache entries / layer",
                title="decode cache growth")
    axes[2].set(xlabel="sequence length", ylabel="median wall ms",
                title="generation wall time")
    for ax in axes:
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()
    out = str(Path(path))
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def save_train_figure(records, eval_rows, path) -> str:
    """Training loss with the validation trace and the lr schedule."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    steps = [r.step for r in records]
    ax1.plot(steps, [r.loss for r in records], lw=0.8, label="train loss")
    if eval_rows:
        ax1.plot([e[0] for e in eval_rows], [e[1] for e in eval_rows],
                 "o-", ms=3, label="val loss")
    ax1.set(xlabel="step", ylabel="cross entropy", title="loss")
    ax1.grid(True, alpha=0.3)
    ax1.legend()
    ax2.plot(steps, [r.lr for r in records], lw=0.8, color="tab:orange")
    ax2.set(xlabel="step", ylabel="learning rate", title="schedule")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    out = str(Path(path))
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def save_ablation_figure(rows, path) -> str:
    """Final validation loss per ablation cell."""
    labels = [f"k{r.interval}/w{r.window}/{'mlp' if r.use_intermediate_mlp else 'nomlp'}"
              for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 0.8 * len(rows)), 4))
    ax.bar(range(len(rows)), [r.val_loss for r in rows], color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set(ylabel="final val loss", title="ablation grid")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    out = str(Path(path))
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out
