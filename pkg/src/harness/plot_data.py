from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from src.environment.dynamics import BodyGeometry, VehicleState
from src.environment.geometry import euclidean_min_gap
from src.harness.episode import EpisodeResult, step_records

TRAJECTORY_FILE = "trajectory.csv"
CONTROLS_FILE = "controls.csv"


def trajectory_frame(result: EpisodeResult) -> pd.DataFrame:
    """Every vehicle's state at every tick: t, step, vehicle_id, role, x, y, psi, v."""
    columns = ["t", "step", "vehicle_id", "role", "x", "y", "psi", "v"]
    return pd.DataFrame(result.trajectory, columns=columns)


def controls_frame(result: EpisodeResult) -> pd.DataFrame:
    """Ego input profile, one row per solver step."""
    frame = pd.DataFrame(step_records(result))
    columns = ["t", "a", "delta", "mode", "cost"]
    if frame.empty:
        return pd.DataFrame(columns=columns)
    return frame[columns + [c for c in frame.columns if c not in columns]]


def emit_plot_data(result: EpisodeResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write the trajectory and control-profile CSVs of an episode.

    Returns:
        Mapping of "trajectory" and "controls" to the written paths
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"trajectory": out_dir / TRAJECTORY_FILE, "controls": out_dir / CONTROLS_FILE}
    trajectory_frame(result).to_csv(paths["trajectory"], index=False, lineterminator="\n")
    controls_frame(result).to_csv(paths["controls"], index=False, lineterminator="\n")
    return paths


def min_distance_from_trajectory(frame: pd.DataFrame, geom: BodyGeometry = BodyGeometry()) -> float:
    """
    Recompute the episode's minimum ego clearance from a trajectory frame.

    Args:
        frame: Trajectory as written by emit_plot_data
        geom: Body dimensions shared by all vehicles

    Returns:
        Smallest euclidean_min_gap between the ego and any other vehicle
    """
    best = np.inf
    for _, tick in frame.groupby("step", sort=True):
        ego_rows = tick[tick["role"] == "ego"]
        if ego_rows.empty:
            continue
        ego_row = ego_rows.iloc[0]
        ego = VehicleState(float(ego_row.x), float(ego_row.y), float(ego_row.psi), float(ego_row.v))
        for row in tick[tick["role"] != "ego"].itertuples(index=False):
            other = VehicleState(float(row.x), float(row.y), float(row.psi), float(row.v))
            best = min(best, euclidean_min_gap(ego, geom, other, geom))
    return float(best)


def read_trajectory(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
