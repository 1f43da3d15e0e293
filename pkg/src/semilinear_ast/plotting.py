"""Figures written next to the tabular reports (``--plot DIR``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STATUS_COLORS = {"match": "tab:blue", "corrected": "tab:orange", "mismatch": "tab:red"}


def _stem(doc: dict) -> str:
    s = doc["spec"]
    return f"{s['variant']}-{s['p']}-{s['alpha']}-{s['omega']}-{s['k']}"


def plot_valencies(doc: dict, outdir) -> Path:
    """Bar chart of the three valencies of every relation."""
    rows = doc["relations"]
    names = [r["name"] for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(rows)), 3.5))
    width = 0.28
    for slot in range(3):
        ax.bar([i + (slot - 1) * width for i in x], [r["valencies"][slot] for r in rows], width,
               label=f"$n^{{({slot + 1})}}$")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_yscale("symlog", linthresh=1)
    ax.set_ylabel("valency")
    ax.set_title(_stem(doc))
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(outdir) / f"valencies-{_stem(doc)}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_crosscheck(doc: dict, outdir) -> Path:
    """Stated closed form against brute force, one point per report line."""
    lines = [line for line in doc["crosscheck"] if isinstance(line["actual"], int)]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for status, color in STATUS_COLORS.items():
        pts = [(line["actual"], line["predicted"]) for line in lines if line["status"] == status]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, s=12, color=color, label=f"{status} ({len(pts)})", alpha=0.7)
    top = max([1] + [max(line["actual"], line["predicted"]) for line in lines])
    ax.plot([0, top], [0, top], color="0.6", lw=0.8, zorder=0)
    ax.set_xlabel("brute force")
    ax.set_ylabel("closed form (as stated)")
    ax.set_title(_stem(doc))
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(outdir) / f"crosscheck-{_stem(doc)}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
