from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.environment.dynamics import VehicleState


class WindowNotReadyError(RuntimeError):
    """The observation window does not hold T_obs rows yet (warm-up phase)."""


class PredictorTimeoutError(RuntimeError):
    """An external predictor missed its response deadline."""


class ShapeMismatchError(ValueError):
    """Two position arrays that must align do not."""


@dataclass(frozen=True, eq=False)
class ObservationWindow:
    """
    The last T_obs center positions of every vehicle in the scene.

    Attributes:
        vehicle_ids: Row order of the window
        positions: (N, T_obs, 2) array, oldest row first
        headings: (N,) current headings, used to seed heading estimates
        ego_index: Row of the ego vehicle, if present
    """
    vehicle_ids: Tuple[int, ...]
    positions: np.ndarray
    headings: np.ndarray
    ego_index: Optional[int] = None

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicle_ids)

    @property
    def t_obs(self) -> int:
        return int(self.positions.shape[1])

    @property
    def current(self) -> np.ndarray:
        """(N, 2) latest positions."""
        return self.positions[:, -1, :]

    def index_of(self, vehicle_id: int) -> int:
        return self.vehicle_ids.index(vehicle_id)

    def advance(self, new_positions: np.ndarray) -> "ObservationWindow":
        """
        Slide the window forward over newly predicted rows.

        Args:
            new_positions: (N, k, 2) positions following the current window

        Returns:
            Window of the same length ending at the last new row
        """
        if new_positions.shape[0] != self.n_vehicles or new_positions.shape[2] != 2:
            raise ShapeMismatchError(
                f"cannot append {new_positions.shape} to window of {self.n_vehicles} vehicles")
        stacked = np.concatenate([self.positions, new_positions], axis=1)
        return ObservationWindow(self.vehicle_ids, stacked[:, -self.t_obs:, :],
                                 self.headings, self.ego_index)


@dataclass(frozen=True, eq=False)
class PredictionSheet:
    """
    Predicted positions for the steps after a window.

    Attributes:
        vehicle_ids: Same order as the window the sheet was predicted from
        positions: (N, T_pred, 2); rows of vehicles that left the scene are NaN
    """
    vehicle_ids: Tuple[int, ...]
    positions: np.ndarray

    @property
    def t_pred(self) -> int:
        return int(self.positions.shape[1])


def ego_positions(ego_states: Sequence[VehicleState]) -> np.ndarray:
    """(k, 2) centers of a sequence of ego states."""
    return np.array([[s.x, s.y] for s in ego_states], dtype=float).reshape(-1, 2)


class Predictor(ABC):
    """
    Base class for interactive motion predictors.

    A predictor maps an observation window, optionally extended by the ego's
    planned positions, to the positions of all vehicles over the next T_pred
    steps.
    """

    kind = "base"

    def __init__(self, t_obs: int = 8, t_pred: int = 2):
        """
        Initialize a predictor.

        Args:
            t_obs: Rows of history the predictor expects
            t_pred: Rows one call predicts
        """
        if t_obs < 1 or t_pred < 1:
            raise ValueError("t_obs and t_pred must be at least 1")
        self.t_obs = t_obs
        self.t_pred = t_pred

    def observe(self, world) -> None:
        """Hook called once per tick with the live world before planning."""

    def check_window(self, window: ObservationWindow, ego_plan: Optional[np.ndarray] = None):
        if window.t_obs < self.t_obs:
            raise WindowNotReadyError(
                f"window has {window.t_obs} of {self.t_obs} rows; still warming up")
        if ego_plan is not None and len(ego_plan) > self.t_pred:
            raise ValueError(f"ego plan has {len(ego_plan)} rows, more than t_pred={self.t_pred}")

    @abstractmethod
    def predict(self, window: ObservationWindow,
                ego_plan: Optional[np.ndarray] = None) -> PredictionSheet:
        """
        Predict the next T_pred positions of every vehicle in the window.

        Args:
            window: Full observation window
            ego_plan: (k <= T_pred, 2) planned ego positions for the same steps

        Returns:
            PredictionSheet in window row order
        """

    def rollout(self, window: ObservationWindow, ego_states: Sequence[VehicleState],
                horizon: int) -> PredictionSheet:
        """
        Predict over a horizon longer than one call covers.

        predict is applied repeatedly in chunks of T_pred; after each chunk the
        window slides over the predicted rows, with the ego row replaced by the
        candidate's own positions.

        Args:
            window: Full observation window at the planning time
            ego_states: Candidate ego states, initial state first (horizon + 1)
            horizon: Number of future steps to predict

        Returns:
            PredictionSheet with `horizon` rows per vehicle
        """
        plan = ego_positions(ego_states[1:horizon + 1]) if ego_states else None
        current = window
        chunks = []
        done = 0
        while done < horizon:
            n = min(self.t_pred, horizon - done)
            chunk_plan = plan[done:done + n] if plan is not None and window.ego_index is not None else None
            sheet = self.predict(current, chunk_plan)
            rows = np.array(sheet.positions[:, :n, :], dtype=float)
            if chunk_plan is not None and len(chunk_plan) == n:
                rows[window.ego_index] = chunk_plan
            chunks.append(rows)
            current = current.advance(rows)
            done += n
        positions = np.concatenate(chunks, axis=1) if chunks else np.zeros((window.n_vehicles, 0, 2))
        return PredictionSheet(window.vehicle_ids, positions)

    def clone(self) -> "Predictor":
        """Instance safe to hand to one rollout worker; stateless predictors return self."""
        return self

    def close(self) -> None:
        """Release external resources."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}(t_obs={self.t_obs}, t_pred={self.t_pred})"
