from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np

from src.environment.dynamics import BodyGeometry, VehicleState

if TYPE_CHECKING:
    from src.agents.driver_params import DriverParams


class VehicleRole(Enum):
    """Who controls a vehicle"""
    EGO = "ego"
    DRIVER = "driver"
    OBSTACLE = "obstacle"


@dataclass(frozen=True)
class VehicleView:
    """Read-only view of one vehicle inside a snapshot."""
    vehicle_id: int
    role: VehicleRole
    state: VehicleState
    geom: BodyGeometry
    lane: int
    intent_lane: int
    params: Optional["DriverParams"] = None


@dataclass(frozen=True)
class TrafficSnapshot:
    """
    Immutable picture of the scene at one tick.

    Drivers decide from a snapshot and never from the live world, so every
    driver in a tick sees the same state regardless of stepping order.
    """
    tick: int
    time: float
    vehicles: Tuple[VehicleView, ...]

    @property
    def ids(self) -> List[int]:
        return [v.vehicle_id for v in self.vehicles]

    def get(self, vehicle_id: int) -> Optional[VehicleView]:
        for view in self.vehicles:
            if view.vehicle_id == vehicle_id:
                return view
        return None

    def ego(self) -> Optional[VehicleView]:
        for view in self.vehicles:
            if view.role == VehicleRole.EGO:
                return view
        return None

    def others(self, vehicle_id: int) -> List[VehicleView]:
        return [v for v in self.vehicles if v.vehicle_id != vehicle_id]

    def positions(self) -> np.ndarray:
        """(N, 2) array of centers in snapshot order."""
        return np.array([[v.state.x, v.state.y] for v in self.vehicles], dtype=float).reshape(-1, 2)

    def headings(self) -> Dict[int, float]:
        return {v.vehicle_id: v.state.psi for v in self.vehicles}

    def leader(self, x: float, lane: int, exclude_id: int) -> Optional[VehicleView]:
        """Nearest vehicle strictly ahead of x in a lane."""
        best = None
        for view in self.vehicles:
            if view.vehicle_id == exclude_id or view.lane != lane or view.state.x <= x:
                continue
            if best is None or view.state.x < best.state.x:
                best = view
        return best

    def follower(self, x: float, lane: int, exclude_id: int) -> Optional[VehicleView]:
        """Nearest vehicle at or behind x in a lane."""
        best = None
        for view in self.vehicles:
            if view.vehicle_id == exclude_id or view.lane != lane or view.state.x > x:
                continue
            if best is None or view.state.x > best.state.x:
                best = view
        return best
