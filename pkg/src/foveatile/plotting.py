"""Figures for the CSV reports.  Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "svg.hashsalt": "foveatile",
}

ZONE_EDGES = (9.0, 30.0)


def figsize(scale=1.0, ratio=None):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    width = 6.0 * scale
    return width, width * (ratio or golden)


def _save(fig, path):
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else {"Date": None})
    plt.close(fig)
    return path


def plot_curves(curves: dict, path, ylabel="normalized value"):
    """``curves`` maps a label to ``(theta, values)``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        for label, (theta, vals) in curves.items():
            ax.plot(theta, vals, label=label)
        for edge in ZONE_EDGES:
            ax.axvline(edge, color="0.5", lw=0.8, ls="--")
        ax.set_xlabel(r"eccentricity $\theta$ (deg)")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def plot_savings_vs_size(points, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        L = np.array([p.lossless_bytes for p in points], dtype=float) * 8 / 1e6
        dt = np.array([p.delta_t for p in points]) * 100
        ax.scatter(L, dt, s=14)
        for p, x, y in zip(points, L, dt):
            ax.annotate(str(p.step), (x, y), textcoords="offset points", xytext=(3, 3), fontsize=6)
        ax.set_xlabel("lossless FoV size L (Mbit)")
        ax.set_ylabel(r"retrieval time reduction $\Delta T$ (%)")
        fig.tight_layout()
        return _save(fig, path)


def plot_retrieval(report, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        agg = report.aggregate()
        bws = list(agg)
        x = np.arange(len(bws))
        ax.bar(x - 0.2, [agg[b][0] for b in bws], width=0.4, label="uniform")
        ax.bar(x + 0.2, [agg[b][1] for b in bws], width=0.4, label="foveated")
        ax.set_xticks(x, [f"{b:g} Mbps" for b in bws])
        ax.set_ylabel("mean retrieval time (s)")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def plot_plan(plan_obj, manifest, path):
    """QP map of the zoom-level tiles in a plan."""
    lv = plan_obj.zoom_level
    cols, rows = manifest.grid(lv)
    grid = np.full((rows, cols), np.nan)
    for e in plan_obj.entries:
        if e.level == lv:
            grid[e.y, e.x] = e.qp
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(ratio=rows / max(cols, 1) + 0.1))
        im = ax.imshow(grid, cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, label="QP")
        ax.set_xlabel("tile x")
        ax.set_ylabel("tile y")
        ax.grid(False)
        fig.tight_layout()
        return _save(fig, path)
