from typing import Tuple, Union

import numpy as np

from src.predictors.base import PredictionSheet, ShapeMismatchError

Positions = Union[PredictionSheet, np.ndarray]


def _as_array(sheet: Positions) -> np.ndarray:
    return np.asarray(sheet.positions if isinstance(sheet, PredictionSheet) else sheet, dtype=float)


def ade_fde(predicted: Positions, truth: Positions) -> Tuple[float, float]:
    """
    Average and final displacement error.

    Args:
        predicted: (N, T_pred, 2) predicted positions
        truth: Ground truth of the same shape

    Returns:
        (ADE, FDE) in meters: mean Euclidean error over all vehicles and
        steps, and mean Euclidean error at the last step
    """
    p, t = _as_array(predicted), _as_array(truth)
    if p.shape != t.shape:
        raise ShapeMismatchError(f"predicted {p.shape} vs truth {t.shape}")
    if p.ndim != 3 or p.shape[-1] != 2 or p.shape[1] == 0:
        raise ShapeMismatchError(f"expected (N, T_pred, 2), got {p.shape}")
    errors = np.linalg.norm(p - t, axis=-1)
    return float(errors.mean()), float(errors[:, -1].mean())
