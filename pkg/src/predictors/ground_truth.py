import math
from typing import List, Optional, Sequence

import numpy as np

from src.environment.dynamics import VehicleState
from src.predictors.base import ObservationWindow, PredictionSheet, Predictor, WindowNotReadyError


class GroundTruthPredictor(Predictor):
    """
    Oracle predictor: runs the simulator itself forward.

    observe() keeps a private copy of the world each tick; every prediction
    clones that copy, places the ego on the candidate's states and lets the
    simulated drivers react, so the result is exactly what the world will do if
    the ego follows the candidate.
    """

    kind = "oracle"

    def __init__(self, t_obs: int = 8, t_pred: int = 2):
        super().__init__(t_obs, t_pred)
        self._world = None

    def observe(self, world) -> None:
        self._world = world.clone()

    def _require_world(self):
        if self._world is None:
            raise WindowNotReadyError("ground-truth predictor has not observed a world yet")
        return self._world

    def rollout(self, window: ObservationWindow, ego_states: Sequence[VehicleState],
                horizon: int) -> PredictionSheet:
        """
        Simulate `horizon` ticks of a private world copy.

        Args:
            window: Window whose rows define the output order
            ego_states: Ego states to force, initial state first; past its end
                the ego coasts with zero input
            horizon: Ticks to simulate

        Returns:
            PredictionSheet; vehicles that leave the scene get NaN rows
        """
        twin = self._require_world().clone()
        positions = np.full((window.n_vehicles, horizon, 2), np.nan)
        for k in range(horizon):
            if k + 1 < len(ego_states):
                twin.step(ego_state=ego_states[k + 1])
            else:
                twin.step()
            for row, vehicle_id in enumerate(window.vehicle_ids):
                vehicle = twin.vehicles.get(vehicle_id)
                if vehicle is not None:
                    positions[row, k] = (vehicle.state.x, vehicle.state.y)
        return PredictionSheet(window.vehicle_ids, positions)

    def predict(self, window: ObservationWindow,
                ego_plan: Optional[np.ndarray] = None) -> PredictionSheet:
        self.check_window(window, ego_plan)
        world = self._require_world()
        states: List[VehicleState] = []
        if ego_plan is not None and world.ego is not None:
            states = self._states_from_positions(world.ego.state, np.asarray(ego_plan, dtype=float), world.dt)
        return self.rollout(window, states, self.t_pred)

    @staticmethod
    def _states_from_positions(start: VehicleState, plan: np.ndarray, dt: float) -> List[VehicleState]:
        """Ego states whose heading and speed follow consecutive planned positions."""
        states = [start]
        prev = start
        for x, y in plan:
            dx, dy = x - prev.x, y - prev.y
            dist = math.hypot(dx, dy)
            psi = math.atan2(dy, dx) if dist >= 1e-3 else prev.psi
            prev = VehicleState(x=float(x), y=float(y), psi=psi, v=dist / dt)
            states.append(prev)
        return states
