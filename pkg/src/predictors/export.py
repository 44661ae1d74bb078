"""
Training data for learned predictors.

An episode trajectory (one row per vehicle and step) is cut into sliding
windows of T_obs observed positions followed by T_pred target positions, and
written as CSV with columns window_id, vehicle_id, step_index, role, x, y.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

COLUMNS = ["window_id", "vehicle_id", "step_index", "role", "x", "y"]


@dataclass(frozen=True, eq=False)
class TrainingWindow:
    """One exported window: the vehicles present throughout it and their tracks."""
    window_id: int
    vehicle_ids: Tuple[int, ...]
    observed: np.ndarray
    target: np.ndarray


def count_windows(n_steps: int, t_obs: int, t_pred: int) -> int:
    return max(0, n_steps - t_obs - t_pred + 1)


def sliding_windows(trajectory: pd.DataFrame, t_obs: int = 8, t_pred: int = 2,
                    noise: float = 0.0, rng: Optional[np.random.Generator] = None) -> pd.DataFrame:
    """
    Cut an episode trajectory into training windows.

    Args:
        trajectory: Frame with at least step, vehicle_id, x, y
        t_obs: Observed rows per window
        t_pred: Target rows per window
        noise: Standard deviation of Gaussian noise added to observed positions (m)
        rng: Stream for the noise

    Returns:
        Frame with COLUMNS; only vehicles present over the whole window appear
    """
    if noise > 0 and rng is None:
        raise ValueError("noise requires a random generator")

    steps = np.sort(trajectory["step"].unique())
    xs = trajectory.pivot(index="step", columns="vehicle_id", values="x").reindex(steps)
    ys = trajectory.pivot(index="step", columns="vehicle_id", values="y").reindex(steps)
    vehicle_ids = xs.columns.to_numpy()
    positions = np.stack([xs.to_numpy(dtype=float), ys.to_numpy(dtype=float)], axis=-1)

    span = t_obs + t_pred
    roles = ["obs"] * t_obs + ["pred"] * t_pred
    indices = list(range(t_obs)) + list(range(t_pred))
    frames = []
    for window_id in range(count_windows(len(steps), t_obs, t_pred)):
        block = positions[window_id:window_id + span]
        present = np.flatnonzero(~np.isnan(block).any(axis=(0, 2)))
        for column in present:
            track = block[:, column, :].copy()
            if noise > 0:
                track[:t_obs] += rng.normal(0.0, noise, size=(t_obs, 2))
            frames.append(pd.DataFrame({
                "window_id": window_id,
                "vehicle_id": int(vehicle_ids[column]),
                "step_index": indices,
                "role": roles,
                "x": track[:, 0],
                "y": track[:, 1],
            }))
    if not frames:
        return pd.DataFrame(columns=COLUMNS)
    return pd.concat(frames, ignore_index=True)[COLUMNS]


def export_training_batch(trajectory: pd.DataFrame, path: Union[str, Path],
                          t_obs: int = 8, t_pred: int = 2, noise: float = 0.0,
                          rng: Optional[np.random.Generator] = None) -> int:
    """
    Write the training windows of one episode.

    Returns:
        Number of windows written
    """
    frame = sliding_windows(trajectory, t_obs, t_pred, noise, rng)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    n_windows = int(frame["window_id"].nunique()) if len(frame) else 0
    logger.info("exported training batch", extra={"event": "export",
                                                   "fields": {"path": str(path), "windows": n_windows}})
    return n_windows


def read_training_batch(path: Union[str, Path]) -> List[TrainingWindow]:
    """
    Read an exported batch back into arrays.

    Returns:
        Windows in file order
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = set(COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")

    windows = []
    for window_id, rows in frame.groupby("window_id", sort=False):
        vehicle_ids = tuple(int(v) for v in pd.unique(rows["vehicle_id"]))
        observed, target = [], []
        for vehicle_id in vehicle_ids:
            track = rows[rows["vehicle_id"] == vehicle_id]
            obs = track[track["role"] == "obs"].sort_values("step_index")
            pred = track[track["role"] == "pred"].sort_values("step_index")
            observed.append(obs[["x", "y"]].to_numpy(dtype=float))
            target.append(pred[["x", "y"]].to_numpy(dtype=float))
        windows.append(TrainingWindow(int(window_id), vehicle_ids, np.stack(observed), np.stack(target)))
    return windows
