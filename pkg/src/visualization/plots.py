from pathlib import Path
from typing import Dict, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from src.environment.road import Road  # noqa: E402


def plot_positions(trajectory: pd.DataFrame, road: Road, path: Union[str, Path]) -> Path:
    """
    Position traces of every vehicle over the road, ego highlighted.

    Args:
        trajectory: Frame with vehicle_id, role, x, y
        road: Lane layout (lane lines and x_end are drawn)
        path: PNG file to write
    """
    fig, ax = plt.subplots(figsize=(12, 3.5))
    half = 0.5 * road.lane_width
    for boundary in range(road.n_lanes + 1):
        y = boundary * road.lane_width - half
        ax.axhline(y, color="0.6", lw=0.8, ls="-" if boundary in (0, road.n_lanes) else "--")
    ax.axvline(road.x_end, color="tab:red", lw=1.0, ls=":", label="x_end")

    for vehicle_id, track in trajectory.groupby("vehicle_id"):
        role = track["role"].iloc[0]
        if role == "ego":
            ax.plot(track["x"], track["y"], color="tab:blue", lw=2.0, label="ego")
        elif role == "obstacle":
            ax.plot(track["x"], track["y"], "s", color="k", ms=6)
        else:
            ax.plot(track["x"], track["y"], color="0.4", lw=0.6, alpha=0.6)

    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="upper left")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_controls(controls: pd.DataFrame, path: Union[str, Path],
                  bounds: Optional[Dict[str, float]] = None) -> Path:
    """
    Acceleration (top) and steering angle (bottom) of the ego over time.

    Args:
        controls: Frame with t, a, delta
        path: PNG file to write
        bounds: Optional a_min, a_max, delta_min, delta_max drawn as limits
    """
    fig, (ax_a, ax_d) = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    ax_a.step(controls["t"], controls["a"], where="post", color="tab:blue")
    ax_d.step(controls["t"], controls["delta"], where="post", color="tab:orange")
    if bounds:
        for key, ax in (("a", ax_a), ("delta", ax_d)):
            for side in ("min", "max"):
                value = bounds.get(f"{key}_{side}")
                if value is not None:
                    ax.axhline(value, color="0.6", lw=0.8, ls="--")
    ax_a.set_ylabel("a [m/s²]")
    ax_d.set_ylabel("δ [rad]")
    ax_d.set_xlabel("t [s]")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
