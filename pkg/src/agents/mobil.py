"""
MOBIL lane-change criterion (Minimizing Overall Braking Induced by Lane changes).

A driver changes lanes only if the new follower would not have to brake harder
than b_safe, and its own acceleration gain plus politeness times the gains of
the affected followers beats a threshold.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from src.agents.driver_params import DriverParams
from src.agents.idm import FREE_ROAD_GAP, idm_acceleration
from src.environment.dynamics import BodyGeometry, VehicleState


class LaneChange(Enum):
    STAY = "stay"
    CHANGE_LEFT = "change_left"
    CHANGE_RIGHT = "change_right"


@dataclass(frozen=True)
class MobilSettings:
    politeness: float = 0.5
    a_threshold: float = 0.1
    b_safe: float = 4.0


@dataclass(frozen=True)
class Neighbor:
    """
    A surrounding vehicle as seen by MOBIL.

    params is None for vehicles that do not follow IDM (the ego, a stopped
    vehicle); their accelerations are left out of the politeness sum.
    """
    state: VehicleState
    geom: BodyGeometry
    params: Optional[DriverParams] = None


@dataclass(frozen=True)
class LaneNeighbors:
    leader: Optional[Neighbor] = None
    follower: Optional[Neighbor] = None


def bumper_gap(follower_state: VehicleState, follower_geom: BodyGeometry,
               leader_state: VehicleState, leader_geom: BodyGeometry) -> float:
    """Longitudinal gap between the follower's front and the leader's rear."""
    return (leader_state.x - leader_geom.h) - (follower_state.x + follower_geom.h)


def acceleration_behind(state: VehicleState, geom: BodyGeometry, params: DriverParams,
                        leader: Optional[Neighbor]) -> float:
    """IDM acceleration of a vehicle following `leader` (free road if None)."""
    if leader is None:
        return idm_acceleration(state.v, FREE_ROAD_GAP, 0.0, params)
    gap = bumper_gap(state, geom, leader.state, leader.geom)
    return idm_acceleration(state.v, gap, state.v - leader.state.v, params)


def _evaluate(me: Neighbor, current: LaneNeighbors, target: LaneNeighbors,
              settings: MobilSettings) -> Optional[float]:
    """Incentive of a change into `target`, or None when the change is unsafe."""
    as_leader = Neighbor(me.state, me.geom, me.params)

    # physical room: the slot must not overlap either target-lane neighbor
    if target.leader is not None and bumper_gap(
            me.state, me.geom, target.leader.state, target.leader.geom) <= 0.0:
        return None
    if target.follower is not None and bumper_gap(
            target.follower.state, target.follower.geom, me.state, me.geom) <= 0.0:
        return None

    new_follower_gain = 0.0
    nf = target.follower
    if nf is not None and nf.params is not None:
        nf_after = acceleration_behind(nf.state, nf.geom, nf.params, as_leader)
        if nf_after < -settings.b_safe:
            return None
        nf_before = acceleration_behind(nf.state, nf.geom, nf.params, target.leader)
        new_follower_gain = nf_after - nf_before

    own_before = acceleration_behind(me.state, me.geom, me.params, current.leader)
    own_after = acceleration_behind(me.state, me.geom, me.params, target.leader)

    old_follower_gain = 0.0
    of = current.follower
    if of is not None and of.params is not None:
        of_before = acceleration_behind(of.state, of.geom, of.params, as_leader)
        of_after = acceleration_behind(of.state, of.geom, of.params, current.leader)
        old_follower_gain = of_after - of_before

    return (own_after - own_before) + settings.politeness * (new_follower_gain + old_follower_gain)


def mobil_lane_change(state: VehicleState, params: DriverParams, current: LaneNeighbors,
                      targets: Dict[LaneChange, LaneNeighbors],
                      settings: MobilSettings = MobilSettings()) -> LaneChange:
    """
    Decide whether a driver should change lanes.

    Args:
        state: The deciding driver's state
        params: The deciding driver's parameters
        current: Leader and follower in the current lane
        targets: Leader and follower in each admissible target lane, keyed by
            the direction of the change
        settings: Politeness, incentive threshold and safe braking limit

    Returns:
        The chosen LaneChange; STAY when no admissible change passes both the
        safety and the incentive criterion
    """
    me = Neighbor(state, params.geom, params)
    best = LaneChange.STAY
    best_incentive = settings.a_threshold

    for direction in (LaneChange.CHANGE_LEFT, LaneChange.CHANGE_RIGHT):
        if direction not in targets:
            continue
        incentive = _evaluate(me, current, targets[direction], settings)
        if incentive is not None and incentive > best_incentive:
            best, best_incentive = direction, incentive

    return best
