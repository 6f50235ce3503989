# File: src/reports/figures.py

"""Static figures written next to the CSV outputs when --plot is given."""

from pathlib import Path
from typing import Dict, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.analysis.social import DistanceCurve  # noqa: E402
from src.mobility.traces import Trace  # noqa: E402
from src.simulation.contention import CongestionGrid, ModelComparison, congestion_points  # noqa: E402

PathLike = Union[str, Path]


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_pair_features(frame: pd.DataFrame, path: PathLike) -> Path:
    """Average distance against checkin similarity, friends vs non-friends."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for is_friend, color, label in ((False, "tab:red", "non-friends"), (True, "tab:blue", "friends")):
        part = frame[frame["is_friend"] == is_friend]
        ax.scatter(part["avg_distance_km"], part["checkin_similarity"], s=8, c=color, label=label, alpha=0.6)
    ax.set_xlabel("average distance (km)")
    ax.set_ylabel("checkin similarity")
    ax.legend()
    return _save(fig, path)


def plot_traces(panels: Dict[str, Sequence[Trace]], width: float, height: float, path: PathLike) -> Path:
    """One panel per trace set, e.g. {"FMM": ..., "RWP": ...}."""
    fig, axes = plt.subplots(1, len(panels), figsize=(5.5 * len(panels), 5), squeeze=False)
    for ax, (title, traces) in zip(axes[0], panels.items()):
        for trace in traces:
            ax.plot([w.x for w in trace], [w.y for w in trace], linewidth=0.5)
        ax.set_xlim(0, width)
        ax.set_ylim(0, height)
        ax.set_aspect("equal")
        ax.set_title(title)
    plt.tight_layout()
    return _save(fig, path)


def plot_distance_curve(curve: DistanceCurve, path: PathLike) -> Path:
    centers = curve.bin_centers
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(centers, curve.friend_fraction, marker="o", label="friends")
    ax.plot(centers, curve.nonfriend_fraction, marker="s", label="non-friends")
    ax.set_xlabel("average distance (km)")
    ax.set_ylabel("fraction of pairs")
    ax.legend()
    return _save(fig, path)


def plot_heatmap(grid: CongestionGrid, path: PathLike, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(grid.backoffs, origin="lower", cmap="hot",
                      extent=(0, grid.width, 0, grid.height))
    fig.colorbar(image, ax=ax, label="backoffs")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_congestion_points(comparison: ModelComparison, path: PathLike) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    for report, color in ((comparison.fmm, "tab:blue"), (comparison.rwp, "tab:red")):
        points = congestion_points(report.grid)
        if len(points):
            sizes = 200 * points["backoffs"] / max(int(points["backoffs"].max()), 1)
            ax.scatter(points["x"], points["y"], s=np.maximum(sizes, 2), c=color,
                       alpha=0.5, label=report.label.upper())
    grid = comparison.fmm.grid
    ax.set_xlim(0, grid.width)
    ax.set_ylim(0, grid.height)
    ax.set_aspect("equal")
    ax.legend()
    return _save(fig, path)
