"""
Cooperative yielding of simulated drivers.

Zone A (forced): the intruder's body has crossed into the driver's lane within
h + s0 ahead of the driver's front bumper; the driver must let it in.
Zone B (selective): the intruder is in the adjacent lane within the perception
range ahead; the driver yields with probability eta_c, drawn once per episode.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.agents.driver_params import DriverParams
from src.agents.memory import Memory
from src.environment.dynamics import BodyGeometry, VehicleState
from src.environment.road import Road


class YieldZone(Enum):
    NONE = "none"
    A_FORCED = "A_forced"
    B_SELECTIVE = "B_selective"


class PerceptionAxis(Enum):
    """Which extent of zone B the perception perturbation eta_p shifts."""
    LONGITUDINAL = "longitudinal"
    LATERAL = "lateral"


@dataclass(frozen=True)
class YieldDecision:
    zone: YieldZone
    yielding: bool


@dataclass(frozen=True)
class ZoneSettings:
    """
    Yield-zone dimensions.

    Attributes:
        zone_b_length: Base longitudinal reach of zone B ahead of the front bumper (m)
        zone_b_lateral: Base lateral reach of zone B into the adjacent lane,
            measured from the shared lane line (m)
        zone_a_intrusion: How far the intruder's body must cross the lane line
            before zone A applies (m)
        perception_axis: Extent of zone B perturbed by eta_p
    """
    zone_b_length: float = 6.0
    zone_b_lateral: float = 3.7
    zone_a_intrusion: float = 0.3
    perception_axis: PerceptionAxis = PerceptionAxis.LONGITUDINAL


def classify_zone(state: VehicleState, params: DriverParams, lane: int,
                  intruder: VehicleState, intruder_geom: BodyGeometry,
                  road: Road, settings: ZoneSettings = ZoneSettings()) -> YieldZone:
    """
    Locate an intruder relative to a driver's yield zones.

    Args:
        state: The driver's state
        params: The driver's parameters
        lane: The driver's lane
        intruder: State of a vehicle from an adjacent lane
        intruder_geom: Its dimensions
        road: Lane layout
        settings: Zone dimensions

    Returns:
        The zone the intruder occupies (A takes precedence over B)
    """
    geom = params.geom
    rear_gap = (intruder.x - intruder_geom.h) - (state.x + geom.h)
    alongside = -2.0 * intruder_geom.h

    # how far the intruder's body reaches past the lane line into our lane
    lateral_offset = abs(intruder.y - road.lane_center(lane))
    intrusion = 0.5 * road.lane_width + intruder_geom.w - lateral_offset

    if intrusion > settings.zone_a_intrusion and alongside < rear_gap <= geom.h + params.s0:
        return YieldZone.A_FORCED

    b_length = settings.zone_b_length
    b_lateral = settings.zone_b_lateral
    if settings.perception_axis == PerceptionAxis.LONGITUDINAL:
        b_length += params.eta_p
    else:
        b_lateral += params.eta_p

    # distance from the intruder's near edge back to the lane line
    edge_distance = lateral_offset - intruder_geom.w - 0.5 * road.lane_width
    if edge_distance <= b_lateral and alongside < rear_gap <= b_length:
        return YieldZone.B_SELECTIVE

    return YieldZone.NONE


def yield_decision(state: VehicleState, params: DriverParams, lane: int,
                   intruder: VehicleState, intruder_geom: BodyGeometry,
                   road: Road, rng: np.random.Generator,
                   memory: Optional[Memory] = None, intruder_id: int = -1,
                   tick: int = 0, settings: ZoneSettings = ZoneSettings()) -> YieldDecision:
    """
    Decide whether a driver yields to an intruder.

    Zone A always yields. In zone B the decision is a Bernoulli(eta_c) draw;
    with a memory it is drawn once when the episode opens and held until the
    intruder leaves both zones.

    Args:
        state: The driver's state
        params: The driver's parameters
        lane: The driver's lane
        intruder: State of the intruding vehicle
        intruder_geom: Its dimensions
        road: Lane layout
        rng: The driver's random stream
        memory: Episode memory, or None to redraw on every call
        intruder_id: Key of the episode in memory
        tick: Current tick, stored with new episodes
        settings: Zone dimensions

    Returns:
        YieldDecision
    """
    zone = classify_zone(state, params, lane, intruder, intruder_geom, road, settings)

    if zone == YieldZone.NONE:
        if memory is not None:
            memory.forget(intruder_id)
        return YieldDecision(zone, False)

    held = memory.recall(intruder_id) if memory is not None else None
    if held is None:
        held = bool(rng.random() < params.eta_c)
        if memory is not None:
            memory.remember(intruder_id, held, tick)

    if zone == YieldZone.A_FORCED:
        return YieldDecision(zone, True)
    return YieldDecision(zone, held)
