import copy
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.agents.driver_params import DriverParams
from src.agents.idm import FREE_ROAD_GAP, idm_acceleration
from src.agents.memory import Memory
from src.agents.mobil import LaneChange, LaneNeighbors, MobilSettings, Neighbor, mobil_lane_change
from src.agents.yielding import YieldDecision, YieldZone, ZoneSettings, yield_decision
from src.environment.dynamics import ControlInput
from src.environment.road import Road
from src.environment.snapshot import TrafficSnapshot, VehicleRole, VehicleView


@dataclass(frozen=True)
class DriverSettings:
    """
    Behaviour shared by the whole simulated population.

    Attributes:
        zones: Yield-zone dimensions
        mobil: MOBIL constants
        lane_changes: Whether drivers may change lanes at all
        mobil_lanes: Lanes drivers may move between
        mobil_interval: Seconds between MOBIL evaluations
        k_lateral: Steering gain on lateral offset (rad/m)
        k_heading: Steering gain on heading error (rad/rad)
        max_steer: Steering saturation (rad)
        lane_capture: Lateral offset below which a lane change counts as done (m)
        accel_noise: Half-width of the uniform acceleration noise (m/s^2), 0 disables
        oscillation_amplitude: Amplitude of the lateral target oscillation (m), 0 disables
        oscillation_period: Period of the lateral target oscillation (s)
        speed_cap: Keep Euler steps from overshooting the desired speed
    """
    zones: ZoneSettings = field(default_factory=ZoneSettings)
    mobil: MobilSettings = field(default_factory=MobilSettings)
    lane_changes: bool = False
    mobil_lanes: Tuple[int, ...] = (2, 3)
    mobil_interval: float = 1.2
    k_lateral: float = 0.15
    k_heading: float = 0.8
    max_steer: float = 0.3
    lane_capture: float = 0.2
    accel_noise: float = 0.3
    oscillation_amplitude: float = 0.1
    oscillation_period: float = 4.0
    speed_cap: bool = True


class Driver:
    """
    A simulated human driver.

    Longitudinal control follows IDM against the effective leader (the closest
    of the lane leader and any intruder being yielded to); lateral control is a
    proportional law tracking the center of the driver's target lane.
    """

    def __init__(self, vehicle_id: int, params: DriverParams, lane: int,
                 rng: np.random.Generator, settings: DriverSettings = DriverSettings()):
        """
        Initialize a new driver.

        Args:
            vehicle_id: Id of the vehicle this driver controls
            params: Sampled driver parameters
            lane: Lane the driver starts in
            rng: The driver's own random stream
            settings: Population-wide behaviour settings
        """
        self.vehicle_id = vehicle_id
        self.params = params
        self.lane = lane
        self.target_lane = lane
        self.rng = rng
        self.settings = settings
        self.memory = Memory()
        self.phase = float(rng.uniform(0.0, 2.0 * math.pi))
        self.last_decisions: Dict[int, YieldDecision] = {}

    def clone(self) -> "Driver":
        """Independent copy, random stream included, for look-ahead simulation."""
        twin = Driver.__new__(Driver)
        twin.vehicle_id = self.vehicle_id
        twin.params = self.params
        twin.lane = self.lane
        twin.target_lane = self.target_lane
        twin.rng = copy.deepcopy(self.rng)
        twin.settings = self.settings
        twin.memory = self.memory.copy()
        twin.phase = self.phase
        twin.last_decisions = dict(self.last_decisions)
        return twin

    @property
    def is_changing_lane(self) -> bool:
        return self.target_lane != self.lane

    def step(self, snapshot: TrafficSnapshot, road: Road, dt: float) -> ControlInput:
        """
        Decide this tick's control from an immutable snapshot.

        Args:
            snapshot: Scene at the current tick
            road: Lane layout
            dt: Step size in seconds

        Returns:
            ControlInput for this driver's vehicle
        """
        me = snapshot.get(self.vehicle_id)
        if me is None:
            raise KeyError(f"vehicle {self.vehicle_id} missing from snapshot")

        self._update_lane(me, road)
        if self.settings.lane_changes and not self.is_changing_lane and self._mobil_due(snapshot, dt):
            self._consider_lane_change(snapshot, me, road)

        accel = self._longitudinal(snapshot, me, road)
        if self.settings.speed_cap and me.state.v < self.params.v_ref:
            accel = min(accel, (self.params.v_ref - me.state.v) / dt)
        if self.settings.accel_noise > 0:
            accel += float(self.rng.uniform(-self.settings.accel_noise, self.settings.accel_noise))

        return ControlInput(a=accel, delta=self._steering(me, road, snapshot.time))

    def _update_lane(self, me: VehicleView, road: Road):
        if self.is_changing_lane:
            offset = abs(me.state.y - road.lane_center(self.target_lane))
            if offset < self.settings.lane_capture:
                self.lane = self.target_lane

    def _mobil_due(self, snapshot: TrafficSnapshot, dt: float) -> bool:
        every = max(1, int(round(self.settings.mobil_interval / dt)))
        return snapshot.tick % every == 0

    def _effective_leaders(self, snapshot: TrafficSnapshot, me: VehicleView) -> List[VehicleView]:
        leaders = []
        for lane in {self.lane, self.target_lane}:
            leader = snapshot.leader(me.state.x, lane, self.vehicle_id)
            if leader is not None:
                leaders.append(leader)
        return leaders

    def _intruders(self, snapshot: TrafficSnapshot, road: Road) -> List[VehicleView]:
        """Vehicles in a neighbouring lane that are trying to enter ours."""
        adjacent = road.adjacent_lanes(self.lane)
        return [
            view for view in snapshot.others(self.vehicle_id)
            if view.lane in adjacent and view.intent_lane == self.lane
            and view.role != VehicleRole.OBSTACLE
        ]

    def _longitudinal(self, snapshot: TrafficSnapshot, me: VehicleView, road: Road) -> float:
        params = self.params
        accel = idm_acceleration(me.state.v, FREE_ROAD_GAP, 0.0, params)

        for leader in self._effective_leaders(snapshot, me):
            gap = (leader.state.x - leader.geom.h) - (me.state.x + me.geom.h)
            accel = min(accel, idm_acceleration(me.state.v, gap, me.state.v - leader.state.v, params))

        self.last_decisions = {}
        intruders = self._intruders(snapshot, road)
        for intruder in intruders:
            decision = yield_decision(
                me.state, params, self.lane, intruder.state, intruder.geom, road, self.rng,
                memory=self.memory, intruder_id=intruder.vehicle_id, tick=snapshot.tick,
                settings=self.settings.zones)
            self.last_decisions[intruder.vehicle_id] = decision
            if decision.yielding:
                gap = (intruder.state.x - intruder.geom.h) - (me.state.x + me.geom.h)
                accel = min(accel, idm_acceleration(
                    me.state.v, gap, me.state.v - intruder.state.v, params))
        self.memory.forget_except(view.vehicle_id for view in intruders)

        return accel

    def _steering(self, me: VehicleView, road: Road, time: float) -> float:
        settings = self.settings
        target_y = road.lane_center(self.target_lane)
        if settings.oscillation_amplitude > 0:
            target_y += settings.oscillation_amplitude * math.sin(
                2.0 * math.pi * time / settings.oscillation_period + self.phase)
        delta = settings.k_lateral * (target_y - me.state.y) - settings.k_heading * me.state.psi
        return min(max(delta, -settings.max_steer), settings.max_steer)

    def _consider_lane_change(self, snapshot: TrafficSnapshot, me: VehicleView, road: Road):
        allowed = [lane for lane in road.adjacent_lanes(self.lane) if lane in self.settings.mobil_lanes]
        if self.lane not in self.settings.mobil_lanes or not allowed:
            return

        def neighbors(lane: int) -> LaneNeighbors:
            leader = snapshot.leader(me.state.x, lane, self.vehicle_id)
            follower = snapshot.follower(me.state.x, lane, self.vehicle_id)
            return LaneNeighbors(leader=self._as_neighbor(leader),
                                 follower=self._as_neighbor(follower))

        targets = {}
        for lane in allowed:
            direction = LaneChange.CHANGE_LEFT if lane > self.lane else LaneChange.CHANGE_RIGHT
            targets[direction] = neighbors(lane)

        choice = mobil_lane_change(me.state, self.params, neighbors(self.lane), targets,
                                   self.settings.mobil)
        if choice == LaneChange.CHANGE_LEFT:
            self.target_lane = self.lane + 1
        elif choice == LaneChange.CHANGE_RIGHT:
            self.target_lane = self.lane - 1

    @staticmethod
    def _as_neighbor(view: Optional[VehicleView]) -> Optional[Neighbor]:
        if view is None:
            return None
        return Neighbor(view.state, view.geom, view.params)

    def get_state_summary(self) -> Dict:
        """
        Get a summary of the driver's internal state.

        Returns:
            Dictionary with lane, target lane and open yield episodes
        """
        return {
            "vehicle_id": self.vehicle_id,
            "lane": self.lane,
            "target_lane": self.target_lane,
            "eta_c": self.params.eta_c,
            "memory": self.memory.get_summary(),
            "zones": {k: d.zone.value for k, d in self.last_decisions.items()
                      if d.zone != YieldZone.NONE},
        }


def driver_step(snapshot: TrafficSnapshot, driver: Driver, road: Road, dt: float) -> ControlInput:
    """Functional form of Driver.step: one driver's control for one tick."""
    return driver.step(snapshot, road, dt)
