"""Static scatter figures of accepted candidate sets (matplotlib, Agg backend)."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

OURS_COLOR = "#2ca02c"
OUTER_COLOR = "#ff7f0e"

_STYLE = {
    "font.size": 9,
    "axes.linewidth": 0.8,
    "svg.hashsalt": "otident",  # stable element ids, so SVG bytes depend only on the data
    "svg.fonttype": "none",
}


def _save(fig, path):
    ext = os.path.splitext(os.fspath(path))[1].lower()
    metadata = {"Date": None} if ext == ".svg" else {"Software": None} if ext == ".png" else None
    fig.savefig(path, metadata=metadata, dpi=150)
    plt.close(fig)


def _panel(ax, ours, outer, title, labels, truth=None):
    if outer is not None and len(outer):
        ax.scatter(outer[:, 0], outer[:, 1], s=2, c=OUTER_COLOR, marker="s", linewidths=0, label="restricted directions")
    if ours is not None and len(ours):
        ax.scatter(ours[:, 0], ours[:, 1], s=2, c=OURS_COLOR, marker="s", linewidths=0, label="identified set")
    if truth is not None:
        ax.plot([truth[0]], [truth[1]], "k+", ms=6, label="truth")
    ax.set_title(title)
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])


def scatter_sets(path, ours, outer=None, title="", labels=("theta_1", "theta_2"), truth=None) -> None:
    """One panel: accepted points of the identified set, optionally over a larger set."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4.5))
        _panel(ax, ours, outer, title, labels, truth)
        ax.legend(loc="best", fontsize=7, markerscale=3)
        fig.tight_layout()
        _save(fig, path)


def panel_grid(path, panels: Sequence[dict], labels=("alpha_a", "alpha_b"), ncols: int = 3) -> None:
    """Several panels; each dict has ``ours``, ``outer`` (or None), ``title`` and optional ``truth``."""
    n = len(panels)
    nrows = int(np.ceil(n / ncols))
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(3.6 * ncols, 3.6 * nrows), squeeze=False)
        for ax, p in zip(axes.ravel(), panels):
            _panel(ax, p.get("ours"), p.get("outer"), p.get("title", ""), labels, p.get("truth"))
        for ax in axes.ravel()[n:]:
            ax.set_axis_off()
        handles, names = axes.ravel()[0].get_legend_handles_labels()
        if handles:
            fig.legend(handles, names, loc="lower center", ncol=len(handles), fontsize=8, markerscale=3)
        fig.tight_layout(rect=(0, 0.05, 1, 1))
        _save(fig, path)
