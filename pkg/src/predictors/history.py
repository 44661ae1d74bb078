from collections import deque
from typing import Deque, Dict, Tuple

import numpy as np

from src.environment.snapshot import TrafficSnapshot, VehicleRole
from src.predictors.base import ObservationWindow


class HistoryBuffer:
    """
    Rolling record of the last T_obs positions of every vehicle.

    A vehicle seen for fewer than T_obs ticks is back-filled by repeating its
    earliest known position, so a window can be built from the first tick on.
    """

    def __init__(self, t_obs: int = 8):
        if t_obs < 1:
            raise ValueError("t_obs must be at least 1")
        self.t_obs = t_obs
        self.tracks: Dict[int, Deque[Tuple[float, float]]] = {}
        self.latest: TrafficSnapshot = None

    def record(self, snapshot: TrafficSnapshot):
        """Append one tick; vehicles absent from the snapshot are dropped."""
        present = set()
        for view in snapshot.vehicles:
            track = self.tracks.setdefault(view.vehicle_id, deque(maxlen=self.t_obs))
            track.append((view.state.x, view.state.y))
            present.add(view.vehicle_id)
        for vehicle_id in [k for k in self.tracks if k not in present]:
            del self.tracks[vehicle_id]
        self.latest = snapshot

    def depth(self, vehicle_id: int) -> int:
        """Number of real (not back-filled) rows held for a vehicle."""
        return len(self.tracks.get(vehicle_id, ()))

    def window(self) -> ObservationWindow:
        """
        Build the observation window for the latest recorded tick.

        Returns:
            ObservationWindow in snapshot order
        """
        if self.latest is None:
            raise RuntimeError("no snapshot recorded yet")

        ids = tuple(self.latest.ids)
        positions = np.empty((len(ids), self.t_obs, 2), dtype=float)
        for row, vehicle_id in enumerate(ids):
            track = list(self.tracks[vehicle_id])
            padding = [track[0]] * (self.t_obs - len(track))
            positions[row] = padding + track

        headings = np.array([view.state.psi for view in self.latest.vehicles], dtype=float)
        ego_index = next((row for row, view in enumerate(self.latest.vehicles)
                          if view.role == VehicleRole.EGO), None)
        return ObservationWindow(ids, positions, headings, ego_index)
