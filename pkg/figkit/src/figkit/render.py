"""Figure renderers.

Each function takes already-loaded data and returns a matplotlib Figure;
:func:`save_figure` writes vector and raster outputs side by side.
Rendering is read-only and deterministic for fixed inputs and style.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
# stable element ids and no timestamps, so identical inputs give
# byte-identical vector output
matplotlib.rcParams["svg.hashsalt"] = "figkit"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def ema(values, smoothing: float = 0.99) -> np.ndarray:
    """Exponential moving average s_t = a*s_{t-1} + (1-a)*x_t, s_0 = x_0."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or len(values) == 0:
        raise ValueError("ema expects a non-empty 1-D series")
    if not 0.0 <= smoothing < 1.0:
        raise ValueError(f"smoothing must be in [0, 1), got {smoothing}")
    out = np.empty_like(values)
    out[0] = values[0]
    for t in range(1, len(values)):
        out[t] = smoothing * out[t - 1] + (1.0 - smoothing) * values[t]
    return out


def save_figure(fig, out_path, formats=("svg", "png")) -> list[str]:
    """Write the figure as vector (svg) and raster (png) files."""
    stem, ext = os.path.splitext(str(out_path))
    written = []
    for fmt in formats:
        target = f"{stem}.{fmt}"
        fig.savefig(target, format=fmt, dpi=150, bbox_inches="tight",
                    metadata={"Date": None} if fmt == "svg" else None)
        written.append(target)
    plt.close(fig)
    return written


def voxel3d(voxels: dict):
    """One cube per (p_3, p_2, p_1) with its exported face color."""
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    n = len(voxels["p1"])
    if n == 0:
        raise ValueError("no voxels to render")
    side = _voxel_side(voxels)
    colors = np.column_stack(
        [voxels["r"], voxels["g"], voxels["b"], voxels["a"]])
    for i in range(n):
        _cube(ax, voxels["p3"][i], voxels["p2"][i], voxels["p1"][i],
              side, colors[i])
    ax.set_xlabel("$p_3$")
    ax.set_ylabel("$p_2$")
    ax.set_zlabel("$p_1$")
    ax.cube_count = n
    return fig


def _voxel_side(voxels):
    # cube edge = the coordinate grid pitch, so neighbors touch
    pitches = []
    for axis in ("p1", "p2", "p3"):
        uniq = np.unique(voxels[axis])
        if len(uniq) > 1:
            pitches.append(np.diff(uniq).min())
    return float(min(pitches)) if pitches else 1.0


def _cube(ax, x, y, z, side, color):
    from mpl_toolkits.mplot3d.art3d import Poly3DCollection
    s = side
    v = np.array([[x, y, z], [x + s, y, z], [x + s, y + s, z], [x, y + s, z],
                  [x, y, z + s], [x + s, y, z + s], [x + s, y + s, z + s],
                  [x, y + s, z + s]], dtype=float)
    faces = [[v[j] for j in face] for face in
             ((0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4),
              (2, 3, 7, 6), (1, 2, 6, 5), (0, 3, 7, 4))]
    ax.add_collection3d(Poly3DCollection(faces, facecolors=[color] * 6,
                                         edgecolors="none"))


def output2d(tuples: np.ndarray, probs: np.ndarray):
    """Inputs x N probability matrix as a heatmap, values verbatim."""
    fig, ax = plt.subplots(figsize=(6, max(3.0, len(tuples) * 0.02)))
    im = ax.imshow(probs, aspect="auto", cmap="viridis", vmin=0.0, vmax=1.0,
                   interpolation="nearest")
    ax.set_xlabel("dimension")
    ax.set_ylabel("input index")
    fig.colorbar(im, ax=ax, label="P(bit = 1)")
    return fig


def payoff_curves(curves: dict[str, dict], sem_multiplier: float = 5.0):
    """Overlay strategy payoff curves with +/- sem_multiplier * SEM bars."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, data in curves.items():
        steps = data["step"]
        ax.errorbar(steps, data["mean_payoff"],
                    yerr=sem_multiplier * data["sem"],
                    label=label, errorevery=max(1, len(steps) // 20),
                    capsize=2, linewidth=1.5)
    ax.set_xlabel("step")
    ax.set_ylabel("mean payoff")
    ax.legend(fontsize=8)
    return fig


def training_curves(metrics: dict, smoothing: float = 0.99):
    """Raw payoff/entropy series plus their EMA overlays."""
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for ax, key, label in ((axes[0], "avg_mean_payoff", "mean payoff"),
                           (axes[1], "entropy", "entropy")):
        raw = metrics[key]
        ax.plot(metrics["epoch"], raw, alpha=0.3, linewidth=0.8, label="raw")
        ax.plot(metrics["epoch"], ema(raw, smoothing), linewidth=1.8,
                label=f"EMA({smoothing})")
        ax.set_ylabel(label)
        ax.legend(fontsize=8)
    axes[1].set_xlabel("epoch")
    return fig


def region_bars(regions: dict):
    """Bar chart of the four region-average output probabilities."""
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["I", "II", "III", "IV"]
    values = [regions[f"region_{lbl}"] for lbl in labels]
    ax.bar(labels, values, color="#4477aa")
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("region")
    ax.set_ylabel("mean P(bit = 1)")
    return fig
