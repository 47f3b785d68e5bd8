"""SVG figures for scenario runs and the gap sweep.

Output is byte-stable: the SVG hash salt is fixed and no date is embedded.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .engine import side_series
from .risk import REPLAN_LOWER, REPLAN_UPPER
from .track import LEFT, RIGHT

COLORS = {LEFT: "tab:blue", RIGHT: "tab:orange"}
PATH_OFFSET = 0.6  # lateral shift of each side's line past the merge, for legibility
PANELS = ("position", "velocity", "acceleration", "risk")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "ceisim"
    matplotlib.rcParams["svg.fonttype"] = "path"
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _markers(ax, t, y, trigger):
    up = trigger == REPLAN_UPPER
    low = trigger == REPLAN_LOWER
    ax.plot(t[up], y[up], "*", color="k", markersize=9, label="re-plan (upper)")
    ax.plot(t[low], y[low], "o", mfc="none", color="k", markersize=6, label="re-plan (lower)")


def run_figures(trace, config, out_dir, stem: str) -> list[Path]:
    """Four panels: driven paths, velocity, net acceleration and perceived risk."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    track = config.track
    series = {side: side_series(trace, side) for side in (LEFT, RIGHT)}
    paths = []

    fig, ax = plt.subplots(figsize=(5, 6))
    for side, ss in series.items():
        x, y, _ = track.poses(side, ss["s"])
        if track.merge_point is not None:
            past = ss["s"] >= track.merge_point
            x = np.where(past, x + (-PATH_OFFSET if side == LEFT else PATH_OFFSET), x)
        else:
            x = x + (-PATH_OFFSET if side == LEFT else PATH_OFFSET)
        ax.plot(x, y, color=COLORS[side], label=side)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    ax.set_title(f"{config.name}: driven paths (offset past the merge)")
    paths.append(_save(fig, out_dir / f"{stem}_position.svg"))
    plt.close(fig)

    for panel, key, label in (
        ("velocity", "v", "velocity [m/s]"),
        ("acceleration", "a_net", "net acceleration [m/s$^2$]"),
    ):
        fig, ax = plt.subplots(figsize=(7, 3.5))
        for side, ss in series.items():
            ax.plot(ss["time"], ss[key], color=COLORS[side], label=side)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(label)
        ax.legend(loc="best")
        paths.append(_save(fig, out_dir / f"{stem}_{panel}.svg"))
        plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 3.5))
    for side, ss in series.items():
        d = config.driver(side)
        ax.plot(ss["time"], ss["monitored_risk"], color=COLORS[side], label=side)
        ax.axhline(d.rho_u, color=COLORS[side], linestyle="--", linewidth=0.8)
        ax.axhline(d.rho_l, color=COLORS[side], linestyle=":", linewidth=0.8)
        _markers(ax, ss["time"], ss["monitored_risk"], ss["trigger"])
    handles, labels = ax.get_legend_handles_labels()
    unique = dict(zip(labels, handles))
    ax.legend(unique.values(), unique.keys(), loc="best")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("perceived risk")
    ax.set_ylim(-0.02, 1.02)
    paths.append(_save(fig, out_dir / f"{stem}_risk.svg"))
    plt.close(fig)
    return paths


def sweep_figure(velocities, gaps, fit, out_path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(velocities, gaps, "o", color="tab:blue", label="steady-state gap")
    if fit is not None:
        slope, intercept, r2 = fit
        xs = np.array([min(velocities), max(velocities)])
        ax.plot(xs, intercept + slope * xs, "-", color="k",
                label=f"OLS: {slope:.3f} m per m/s, R$^2$={r2:.3f}")
    ax.set_xlabel("follower velocity [m/s]")
    ax.set_ylabel("gap [m]")
    ax.legend(loc="best")
    path = _save(fig, Path(out_path))
    plt.close(fig)
    return path
