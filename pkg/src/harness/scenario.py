"""
Construction of the dense-traffic merging scene.

Lane 1 ends at x_end, where a stopped vehicle blocks it; the ego starts
upstream in lane 1 and has to merge into lane 2, which is packed with
simulated drivers at bumper gaps between each driver's minimum gap s0 and
just under one vehicle length, each moving at the IDM equilibrium speed for
its gap so the platoon starts in steady flow.
Lane 3 carries sparser traffic.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.agents.driver import DriverSettings
from src.agents.driver_params import DriverParams, DriverRanges, sample_driver
from src.agents.idm import FREE_ROAD_GAP, equilibrium_speed
from src.agents.population import Population, Regime
from src.environment.dynamics import BodyGeometry, VehicleState
from src.environment.geometry import pair_distance
from src.environment.road import Road
from src.environment.snapshot import VehicleRole
from src.environment.world import World
from src.utils.seeding import SeedStreams

logger = logging.getLogger(__name__)

Range = Tuple[float, float]


class ScenarioError(RuntimeError):
    """No valid initial placement was found for a seed."""


@dataclass(frozen=True)
class ScenarioSettings:
    """
    Harness section of the configuration.

    Attributes:
        n_lanes: Number of lanes
        lane_width: Lane width (m)
        origin_lane: Ego start lane (ends at x_end)
        target_lane: Lane the ego merges into
        time_limit: Episode length (s)
        ego_x: Range of the ego's initial x (m)
        ego_v: Range of the ego's initial speed (m/s)
        stopped_gap: Distance of the stopped vehicle's rear bumper past x_end + h (m)
        lane_start: Upstream end of the populated road section (m)
        wrap_margin: Drivers further than this past x_end leave the scene (m)
        target_gap_max: Upper end of the target-lane bumper gaps (m); gaps are
            drawn from [s0, max(s0, target_gap_max)]
        far_lane_traffic: Populate the lane beyond the target lane
        far_lane_gap: Range of bumper gaps in the far lane (m)
        placement_retries: Attempts before a seed is rejected
        merge_hold_steps: Consecutive captured steps that complete a merge
        noise: Driver oscillation and acceleration noise on
    """
    n_lanes: int = 3
    lane_width: float = 3.7
    origin_lane: int = 1
    target_lane: int = 2
    time_limit: float = 40.0
    ego_x: Range = (5.0, 15.0)
    ego_v: Range = (0.0, 3.0)
    stopped_gap: float = 0.5
    lane_start: float = -20.0
    wrap_margin: float = 40.0
    target_gap_max: float = 3.9
    far_lane_traffic: bool = True
    far_lane_gap: Range = (6.0, 16.0)
    placement_retries: int = 20
    merge_hold_steps: int = 2
    noise: bool = True


@dataclass(frozen=True)
class Placement:
    vehicle_id: int
    role: VehicleRole
    state: VehicleState
    lane: int
    params: Optional[DriverParams] = None


@dataclass(frozen=True)
class Scenario:
    """A fully specified initial scene; building the same Scenario twice gives the same World."""
    seed: int
    regime: Regime
    road: Road
    settings: ScenarioSettings
    placements: Tuple[Placement, ...]
    ranges: DriverRanges = field(default_factory=DriverRanges)
    geom: BodyGeometry = field(default_factory=BodyGeometry)
    driver_settings: DriverSettings = field(default_factory=DriverSettings)

    @property
    def x_end(self) -> float:
        return self.road.x_end

    @property
    def ego(self) -> Placement:
        return next(p for p in self.placements if p.role == VehicleRole.EGO)

    @property
    def stopped(self) -> Placement:
        return next(p for p in self.placements if p.role == VehicleRole.OBSTACLE)

    @property
    def drivers(self) -> List[Placement]:
        return [p for p in self.placements if p.role == VehicleRole.DRIVER]

    def lane_placements(self, lane: int) -> List[Placement]:
        return sorted((p for p in self.drivers if p.lane == lane), key=lambda p: p.state.x)

    @property
    def population(self) -> Population:
        driver_settings = self.driver_settings
        if not self.settings.noise:
            driver_settings = replace(driver_settings, accel_noise=0.0, oscillation_amplitude=0.0)
        return Population(ranges=self.ranges, regime=self.regime, geom=self.geom, settings=driver_settings)

    def build_world(self, dt: float, streams: Optional[SeedStreams] = None) -> World:
        """
        Instantiate the scene.

        Args:
            dt: Simulation step size (s)
            streams: Random streams (defaults to the scenario seed)

        Returns:
            World with vehicles added in placement order
        """
        streams = streams or SeedStreams(self.seed)
        wrap_lanes = [lane for lane in self.road.lanes if lane != self.settings.origin_lane]
        world = World(self.road, self.population, streams, dt,
                      time_limit=self.settings.time_limit,
                      wrap_x=self.x_end + self.settings.wrap_margin, wrap_lanes=wrap_lanes)
        for placement in self.placements:
            intent = self.settings.target_lane if placement.role == VehicleRole.EGO else placement.lane
            vehicle_id = world.add_vehicle(placement.role, placement.state, self.geom,
                                           driver_lane=placement.lane, intent_lane=intent)
            if vehicle_id != placement.vehicle_id:
                raise ScenarioError(f"placement {placement.vehicle_id} got id {vehicle_id}")
        return world


def _pack_lane(lane_y: float, lane: int, front_x: float, rear_limit: float,
               next_id: int, streams: SeedStreams, ranges: DriverRanges, geom: BodyGeometry,
               regime: Regime, gap_rng: np.random.Generator, gap: Optional[Range] = None,
               gap_max: Optional[float] = None) -> List[Placement]:
    """
    Place drivers from front_x backwards until rear_limit.

    Each bumper gap to the vehicle ahead is drawn from `gap` when given, else
    from [s0, max(s0, gap_max)]. Every driver starts at the IDM equilibrium
    speed for its gap; the front driver sees a free road.
    """
    placements = []
    x = front_x
    prev_h = None
    for vehicle_id in itertools.count(next_id):
        params = regime.apply(sample_driver(streams.generator("drivers", vehicle_id), ranges, geom))
        if prev_h is None:
            bumper = FREE_ROAD_GAP
        else:
            if gap is not None:
                bumper = float(gap_rng.uniform(*gap))
            else:
                bumper = float(gap_rng.uniform(params.s0, max(params.s0, gap_max or 0.0)))
            x = x - prev_h - bumper - geom.h
        if x < rear_limit:
            break
        state = VehicleState(x=x, y=lane_y, psi=0.0, v=equilibrium_speed(bumper, params))
        placements.append(Placement(vehicle_id, VehicleRole.DRIVER, state, lane, params))
        prev_h = geom.h
    return placements


def _collision_free(placements: List[Placement], geom: BodyGeometry, epsilon: float) -> bool:
    for first, second in itertools.combinations(placements, 2):
        if pair_distance(first.state, geom, second.state, geom) <= epsilon:
            return False
    return True


def build_scenario(regime, seed: int, settings: ScenarioSettings = ScenarioSettings(),
                   ranges: DriverRanges = DriverRanges(), geom: BodyGeometry = BodyGeometry(),
                   driver_settings: DriverSettings = DriverSettings(),
                   x_end: float = 50.0, epsilon: float = 0.1) -> Scenario:
    """
    Build the initial scene for a seed.

    Vehicle ids: 0 is the ego, 1 the stopped vehicle, then target-lane drivers
    front to back, then far-lane drivers. Driver parameters come from each
    driver's own stream, so the simulator re-samples the same values.

    Args:
        regime: Cooperativeness regime (Regime or its name)
        seed: Root seed
        settings: Harness settings
        ranges: Driver parameter ranges
        geom: Body dimensions shared by all vehicles
        driver_settings: Driver behaviour settings
        x_end: End of the merging lane (m)
        epsilon: Minimum clearance measure between initial placements

    Returns:
        Scenario

    Raises:
        ScenarioError: when no collision-free placement is found
    """
    regime = Regime.parse(regime)
    road = Road(n_lanes=settings.n_lanes, lane_width=settings.lane_width, x_end=x_end)
    streams = SeedStreams(seed)
    front_x = x_end + settings.wrap_margin

    for attempt in range(settings.placement_retries):
        rng = streams.generator("scenario", attempt)
        ego = Placement(0, VehicleRole.EGO, VehicleState(
            x=float(rng.uniform(*settings.ego_x)), y=road.lane_center(settings.origin_lane),
            psi=0.0, v=float(rng.uniform(*settings.ego_v))), settings.origin_lane)
        stopped = Placement(1, VehicleRole.OBSTACLE, VehicleState(
            x=x_end + 2.0 * geom.h + settings.stopped_gap, y=road.lane_center(settings.origin_lane),
            psi=0.0, v=0.0), settings.origin_lane)
        placements = [ego, stopped]

        placements += _pack_lane(road.lane_center(settings.target_lane), settings.target_lane,
                                 front_x, settings.lane_start, len(placements), streams, ranges, geom,
                                 regime, rng, gap_max=settings.target_gap_max)

        far_lane = settings.target_lane + 1
        if settings.far_lane_traffic and far_lane <= road.n_lanes and far_lane != settings.origin_lane:
            placements += _pack_lane(road.lane_center(far_lane), far_lane, front_x - float(rng.uniform(0.0, 10.0)),
                                     settings.lane_start, len(placements), streams, ranges, geom,
                                     regime, rng, gap=settings.far_lane_gap)

        if _collision_free(placements, geom, epsilon):
            return Scenario(seed=seed, regime=regime, road=road, settings=settings,
                            placements=tuple(placements), ranges=ranges, geom=geom,
                            driver_settings=driver_settings)
        logger.debug("placement rejected", extra={"event": "placement_retry",
                                                  "fields": {"seed": seed, "attempt": attempt}})

    raise ScenarioError(f"seed {seed}: no collision-free placement after {settings.placement_retries} attempts")
