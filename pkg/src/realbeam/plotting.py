"""Figure rendering for CLI reports.

Every report command writes its delimited data first; these helpers
render companion PNG figures from the same in-memory objects.  The Agg
backend is forced so rendering works headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = [
    "save_pattern_figure",
    "save_sweep_figure",
    "save_map_figure",
]

_DB_AXIS_FLOOR = -60.0


def save_pattern_figure(path, grids: dict, title: str, xlabel: str = "angle [deg]"):
    """Overlay 1-D beampatterns (label -> BeampatternGrid) in dB."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, grid in grids.items():
        ax.plot(
            [math.degrees(a) for a in grid.angles],
            grid.magnitude_db.clip(min=_DB_AXIS_FLOOR),
            label=label,
            linewidth=1.1,
        )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("magnitude [dB]")
    ax.set_title(title)
    ax.set_ylim(_DB_AXIS_FLOOR, 3.0)
    ax.set_xlim(0.0, 180.0)
    ax.grid(True, alpha=0.4)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_sweep_figure(path, kr, di_columns: dict, sens_columns: dict, title: str):
    """Two-panel directivity-index / sensitivity sweep over kr."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.4), sharex=True)
    for label, values in di_columns.items():
        ax1.plot(kr, values, label=label, linewidth=1.1)
    ax1.set_ylabel("directivity index [dB]")
    ax1.grid(True, alpha=0.4)
    ax1.legend(fontsize=8)
    for label, values in sens_columns.items():
        ax2.plot(kr, values, label=label, linewidth=1.1)
    ax2.set_xlabel("kr")
    ax2.set_ylabel("sensitivity [dB]")
    ax2.grid(True, alpha=0.4)
    ax2.legend(fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_map_figure(path, pwd_map, title: str, floor_db: float = -30.0):
    """Render a PWD intensity map (dB, normalized) as a heatmap."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    mesh = ax.pcolormesh(
        [math.degrees(p) for p in pwd_map.phis],
        [math.degrees(t) for t in pwd_map.thetas],
        pwd_map.magnitude_db.clip(min=floor_db),
        shading="nearest",
        vmin=floor_db,
        vmax=0.0,
    )
    fig.colorbar(mesh, ax=ax, label="relative level [dB]")
    ax.set_xlabel("phi [deg]")
    ax.set_ylabel("theta [deg]")
    ax.invert_yaxis()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
