from typing import Optional

import numpy as np

from src.predictors.base import ObservationWindow, PredictionSheet, Predictor


def extrapolate(positions: np.ndarray, steps: int) -> np.ndarray:
    """
    Constant-velocity extrapolation of the last observed displacement.

    Args:
        positions: (N, T_obs, 2) observed positions
        steps: Rows to predict

    Returns:
        (N, steps, 2) predicted positions
    """
    last = positions[:, -1, :]
    if positions.shape[1] > 1:
        velocity = last - positions[:, -2, :]
    else:
        velocity = np.zeros_like(last)
    k = np.arange(1, steps + 1, dtype=float)[None, :, None]
    return last[:, None, :] + k * velocity[:, None, :]


class ConstantVelocityPredictor(Predictor):
    """Every vehicle keeps its last-step displacement. Does not react to the ego plan."""

    kind = "cv"

    def predict(self, window: ObservationWindow,
                ego_plan: Optional[np.ndarray] = None) -> PredictionSheet:
        self.check_window(window, ego_plan)
        return PredictionSheet(window.vehicle_ids, extrapolate(window.positions, self.t_pred))
