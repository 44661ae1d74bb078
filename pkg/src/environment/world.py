import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence

from src.agents.driver import Driver
from src.agents.population import Population
from src.environment import dynamics
from src.environment.dynamics import BodyGeometry, ControlInput, VehicleState
from src.environment.road import Road
from src.environment.snapshot import TrafficSnapshot, VehicleRole, VehicleView
from src.environment.time_system import TimeSystem
from src.utils.seeding import SeedStreams

logger = logging.getLogger(__name__)


@dataclass
class Vehicle:
    """A vehicle in the world and whoever controls it."""
    vehicle_id: int
    role: VehicleRole
    state: VehicleState
    geom: BodyGeometry
    intent_lane: int
    driver: Optional[Driver] = None

    def copy(self) -> "Vehicle":
        return replace(self, driver=self.driver.clone() if self.driver is not None else None)


class World:
    """
    The traffic scene: road, vehicles, simulated time.

    One tick: every driver decides from the same snapshot, then all vehicles
    are integrated with the bicycle model, then vehicles that left the scene
    downstream are replaced upstream to keep the lanes packed.
    """

    def __init__(self, road: Road, population: Population, streams: SeedStreams,
                 dt: float, time_limit: float = float("inf"),
                 wrap_x: Optional[float] = None, wrap_lanes: Sequence[int] = ()):
        """
        Initialize the world.

        Args:
            road: Lane layout
            population: Driver factory used for replacements
            streams: Random streams of the run
            dt: Global step size shared by all vehicles
            time_limit: Episode length in seconds
            wrap_x: Vehicles past this x leave the scene (None disables)
            wrap_lanes: Lanes where departed vehicles are replaced upstream
        """
        self.road = road
        self.population = population
        self.streams = streams
        self.time_system = TimeSystem(dt, time_limit)
        self.wrap_x = wrap_x
        self.wrap_lanes = tuple(wrap_lanes)

        self.vehicles: Dict[int, Vehicle] = {}
        self.ego_id: Optional[int] = None
        self.next_id = 0

    @property
    def dt(self) -> float:
        return self.time_system.dt

    def add_vehicle(self, role: VehicleRole, state: VehicleState, geom: BodyGeometry,
                    driver_lane: Optional[int] = None, intent_lane: Optional[int] = None) -> int:
        """
        Add a vehicle to the world.

        Args:
            role: Who controls it
            state: Initial state
            geom: Body dimensions
            driver_lane: Lane for a new simulated driver (DRIVER role only)
            intent_lane: Lane the vehicle is heading for (defaults to its current lane)

        Returns:
            The new vehicle id
        """
        vehicle_id = self.next_id
        self.next_id += 1
        lane = self.road.lane_of(state.y)

        driver = None
        if role == VehicleRole.DRIVER:
            driver_lane = lane if driver_lane is None else driver_lane
            driver = self.population.make_driver(
                vehicle_id, driver_lane, self.streams.generator("drivers", vehicle_id))
            geom = driver.params.geom
        elif role == VehicleRole.EGO:
            if self.ego_id is not None:
                raise ValueError("world already has an ego vehicle")
            self.ego_id = vehicle_id

        self.vehicles[vehicle_id] = Vehicle(
            vehicle_id=vehicle_id, role=role, state=state, geom=geom,
            intent_lane=lane if intent_lane is None else intent_lane, driver=driver)
        return vehicle_id

    def remove_vehicle(self, vehicle_id: int):
        vehicle = self.vehicles.pop(vehicle_id)
        if vehicle.role == VehicleRole.EGO:
            self.ego_id = None

    def get_vehicle(self, vehicle_id: int) -> Vehicle:
        return self.vehicles[vehicle_id]

    @property
    def ego(self) -> Optional[Vehicle]:
        return None if self.ego_id is None else self.vehicles[self.ego_id]

    def snapshot(self) -> TrafficSnapshot:
        """Immutable view of the current tick."""
        views = []
        for vehicle in self.vehicles.values():
            driver = vehicle.driver
            views.append(VehicleView(
                vehicle_id=vehicle.vehicle_id,
                role=vehicle.role,
                state=vehicle.state,
                geom=vehicle.geom,
                lane=self.road.lane_of(vehicle.state.y),
                intent_lane=driver.target_lane if driver is not None else vehicle.intent_lane,
                params=driver.params if driver is not None else None,
            ))
        return TrafficSnapshot(tick=self.time_system.get_tick(),
                               time=self.time_system.get_time(),
                               vehicles=tuple(views))

    def driver_controls(self, snapshot: TrafficSnapshot) -> Dict[int, ControlInput]:
        """Controls of every simulated driver for this tick."""
        return {
            vehicle.vehicle_id: vehicle.driver.step(snapshot, self.road, self.dt)
            for vehicle in self.vehicles.values() if vehicle.driver is not None
        }

    def step(self, ego_control: Optional[ControlInput] = None,
             ego_state: Optional[VehicleState] = None) -> TrafficSnapshot:
        """
        Advance the world by one tick.

        Args:
            ego_control: Input applied to the ego vehicle (integrated with the
                bicycle model); ignored when ego_state is given
            ego_state: Ego state to place the ego at after the tick, used by
                look-ahead simulation that follows a precomputed plan

        Returns:
            Snapshot after the tick
        """
        snapshot = self.snapshot()
        controls = self.driver_controls(snapshot)

        for vehicle_id, vehicle in self.vehicles.items():
            if vehicle.role == VehicleRole.DRIVER:
                vehicle.state = dynamics.step(vehicle.state, controls[vehicle_id], vehicle.geom, self.dt)
            elif vehicle.role == VehicleRole.EGO:
                if ego_state is not None:
                    vehicle.state = ego_state
                elif ego_control is not None:
                    vehicle.state = dynamics.step(vehicle.state, ego_control, vehicle.geom, self.dt)
                else:
                    vehicle.state = dynamics.step(vehicle.state, ControlInput(0.0, 0.0), vehicle.geom, self.dt)

        self.time_system.step()
        self._wrap_around()
        return self.snapshot()

    def _wrap_around(self):
        """Replace drivers that left the scene with fresh drivers upstream."""
        if self.wrap_x is None:
            return

        departed = [v for v in self.vehicles.values()
                    if v.role == VehicleRole.DRIVER and v.state.x > self.wrap_x]
        for vehicle in departed:
            lane = vehicle.driver.lane
            self.remove_vehicle(vehicle.vehicle_id)
            if lane in self.wrap_lanes:
                self.spawn_upstream(lane)

    def spawn_upstream(self, lane: int) -> int:
        """
        Insert a new driver behind the rearmost vehicle of a lane.

        The bumper gap to that vehicle is the new driver's own minimum gap s0,
        so the lane stays as dense as it was built.

        Returns:
            Id of the new vehicle
        """
        vehicle_id = self.next_id
        self.next_id += 1
        driver = self.population.make_driver(vehicle_id, lane, self.streams.generator("drivers", vehicle_id))
        geom = driver.params.geom

        in_lane = [v for v in self.vehicles.values() if v.role == VehicleRole.DRIVER and v.driver.lane == lane]
        y = self.road.lane_center(lane)
        if in_lane:
            rear = min(in_lane, key=lambda v: v.state.x)
            x = rear.state.x - rear.geom.h - driver.params.s0 - geom.h
            v = rear.state.v
        else:
            x, v = 0.0, 0.0

        self.vehicles[vehicle_id] = Vehicle(
            vehicle_id=vehicle_id, role=VehicleRole.DRIVER,
            state=VehicleState(x=x, y=y, psi=0.0, v=v), geom=geom,
            intent_lane=lane, driver=driver)
        logger.debug("spawned vehicle", extra={"event": "spawn", "fields": {"vehicle_id": vehicle_id, "lane": lane}})
        return vehicle_id

    def clone(self) -> "World":
        """Deep enough copy for look-ahead simulation; road, population and streams are shared."""
        twin = World.__new__(World)
        twin.road = self.road
        twin.population = self.population
        twin.streams = self.streams
        twin.time_system = self.time_system.copy()
        twin.wrap_x = self.wrap_x
        twin.wrap_lanes = self.wrap_lanes
        twin.vehicles = {k: v.copy() for k, v in self.vehicles.items()}
        twin.ego_id = self.ego_id
        twin.next_id = self.next_id
        return twin
