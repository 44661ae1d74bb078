import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.controller.costs import CostBreakdown, stage_costs
from src.controller.params import ControllerConfig
from src.environment.dynamics import BodyGeometry, ControlInput, VehicleState, propagate
from src.environment.geometry import circle_centers, pair_distance_batch
from src.predictors.base import ObservationWindow, PredictionSheet, Predictor, PredictorTimeoutError

MIN_HEADING_DISPLACEMENT = 1e-3


@dataclass
class RolloutCandidate:
    """
    One sampled input sequence and the outcome of simulating it.

    Attributes:
        index: Position in the sampled set
        controls: (T, 2) inputs as [a, delta]
        states: Ego states, current state first
        cost: Total cost, inf when infeasible
        feasible: Whether every step satisfied the constraints
        infeasible_at: First violating step (1-based along the horizon)
        reason: "collision", "x_end", "road_edge" or "predictor_timeout" when infeasible
        breakdown: Cost terms of a feasible candidate
        min_margin: Smallest clearance measure seen along the checked steps
    """
    index: int
    controls: np.ndarray
    states: List[VehicleState]
    cost: float = math.inf
    feasible: bool = False
    infeasible_at: Optional[int] = None
    reason: str = ""
    breakdown: Optional[CostBreakdown] = None
    min_margin: float = math.inf

    @property
    def first_input(self) -> ControlInput:
        return ControlInput(float(self.controls[0, 0]), float(self.controls[0, 1]))


def predicted_headings(window: ObservationWindow, sheet: PredictionSheet) -> np.ndarray:
    """
    Estimate headings from consecutive predicted positions.

    The heading of a step is atan2 of the displacement into it; displacements
    shorter than 1 mm (and NaN rows) keep the previous heading. The first
    displacement is taken from the last observed position.

    Returns:
        (N, T) headings
    """
    previous_positions = window.current
    previous = np.array(window.headings, dtype=float)
    headings = np.empty(sheet.positions.shape[:2])
    for step in range(sheet.t_pred):
        current = sheet.positions[:, step, :]
        delta = current - previous_positions
        distance = np.hypot(delta[:, 0], delta[:, 1])
        moving = np.nan_to_num(distance, nan=0.0) >= MIN_HEADING_DISPLACEMENT
        estimate = np.where(moving, np.arctan2(delta[:, 1], delta[:, 0]), previous)
        headings[:, step] = estimate
        previous = estimate
        previous_positions = current
    return headings


def within_road(state: VehicleState, geom: BodyGeometry, config: ControllerConfig) -> bool:
    """Whether every footprint circle stays between y_min and y_max."""
    if config.y_min is None and config.y_max is None:
        return True
    circles = circle_centers(state, geom)
    ys = [y for _, y in circles.centers]
    if config.y_min is not None and min(ys) - circles.radius < config.y_min:
        return False
    if config.y_max is not None and max(ys) + circles.radius > config.y_max:
        return False
    return True


def evaluate_candidate(index: int, controls: np.ndarray, ego_state: VehicleState,
                       ego_geom: BodyGeometry, window: ObservationWindow, predictor: Predictor,
                       config: ControllerConfig, target_y: float,
                       other_geom: Optional[BodyGeometry] = None) -> RolloutCandidate:
    """
    Simulate one candidate and score it.

    The ego is propagated with the bicycle model, the other vehicles are
    predicted conditioned on the ego's resulting states, and each step is
    checked for clearance against the predictions, for the lane-end bound and
    for the road edges.
    The first violation ends the evaluation.

    Args:
        index: Candidate index
        controls: (T, 2) inputs as [a, delta]
        ego_state: Current ego state
        ego_geom: Ego dimensions
        window: Observation window at the planning time
        predictor: Predictor instance owned by this evaluation
        config: Controller configuration
        target_y: Target lane center
        other_geom: Nominal geometry of the other vehicles (defaults to ego_geom)

    Returns:
        RolloutCandidate
    """
    other_geom = other_geom or ego_geom
    controls = np.asarray(controls, dtype=float)
    horizon = len(controls)
    states = propagate(ego_state, [ControlInput(float(a), float(d)) for a, d in controls],
                       ego_geom, config.dt)
    candidate = RolloutCandidate(index=index, controls=controls, states=states)

    try:
        sheet = predictor.rollout(window, states, horizon)
    except PredictorTimeoutError:
        candidate.infeasible_at = 1
        candidate.reason = "predictor_timeout"
        return candidate

    headings = predicted_headings(window, sheet)
    others = np.ones(window.n_vehicles, dtype=bool)
    if window.ego_index is not None:
        others[window.ego_index] = False

    for step in range(horizon):
        state = states[step + 1]
        if state.x > config.x_end:
            candidate.infeasible_at = step + 1
            candidate.reason = "x_end"
            return candidate
        if not within_road(state, ego_geom, config):
            candidate.infeasible_at = step + 1
            candidate.reason = "road_edge"
            return candidate

        positions = sheet.positions[:, step, :]
        mask = others & ~np.isnan(positions).any(axis=1)
        margins = pair_distance_batch(state, ego_geom, positions[mask], headings[mask, step], other_geom)
        if len(margins):
            candidate.min_margin = min(candidate.min_margin, float(margins.min()))
            if margins.min() < config.epsilon:
                candidate.infeasible_at = step + 1
                candidate.reason = "collision"
                return candidate

    candidate.breakdown = stage_costs(states, controls, config, target_y)
    candidate.cost = candidate.breakdown.total
    candidate.feasible = True
    return candidate
