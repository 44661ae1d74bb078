import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.controller.params import ControllerConfig
from src.environment.dynamics import VehicleState

Box = Tuple[Tuple[float, float], Tuple[float, float]]


class ManeuverMode(Enum):
    KEEP = "keep"
    CHANGE_LEFT = "change_left"
    CHANGE_RIGHT = "change_right"


def action_box(mode: ManeuverMode, config: ControllerConfig) -> Box:
    """
    Input box of a maneuver mode.

    Returns:
        ((a_lo, a_hi), (delta_lo, delta_hi))
    """
    accel = (config.a_min, config.a_max)
    if mode == ManeuverMode.CHANGE_LEFT:
        return accel, (max(0.0, config.delta_min), config.delta_max)
    if mode == ManeuverMode.CHANGE_RIGHT:
        return accel, (config.delta_min, min(0.0, config.delta_max))
    return accel, (config.alpha * config.delta_min, config.alpha * config.delta_max)


def sample_candidates(mode: ManeuverMode, config: ControllerConfig, rng: np.random.Generator,
                      n: Optional[int] = None) -> np.ndarray:
    """
    Draw candidate input sequences uniformly from a mode's box.

    Args:
        mode: Maneuver mode
        config: Bounds, horizon, sampling variant
        rng: Controller stream
        n: Number of candidates (defaults to N_sim)

    Returns:
        (n, T, 2) array of [a, delta]
    """
    n = config.N_sim if n is None else n
    horizon = config.horizon
    (a_lo, a_hi), (d_lo, d_hi) = action_box(mode, config)

    steps = 1 if config.sampling == "hold" else horizon
    accel = rng.uniform(a_lo, a_hi, size=(n, steps))
    steer = rng.uniform(d_lo, d_hi, size=(n, steps))
    candidates = np.stack([accel, steer], axis=-1)
    if steps == 1:
        candidates = np.repeat(candidates, horizon, axis=1)

    if config.inject_zero_candidate and n > 0:
        candidates[0] = np.array([np.clip(0.0, a_lo, a_hi), np.clip(0.0, d_lo, d_hi)])
    return candidates


def select_mode(state: VehicleState, target_y: float, config: ControllerConfig) -> ManeuverMode:
    """
    Pick the maneuver direction towards the target lane.

    The ego keeps its lane once it is inside the lateral tolerance and aligned
    with the road. Otherwise the direction follows the lateral error left after
    holding the current heading for mode_lookahead seconds, so a vehicle that is
    already heading past the target center steers back before it overshoots.
    """
    offset = target_y - state.y
    if abs(offset) <= config.capture_tolerance_y and abs(state.psi) <= config.capture_tolerance_psi:
        return ManeuverMode.KEEP
    projected = offset - state.v * config.mode_lookahead * math.sin(state.psi)
    direction = projected if projected != 0.0 else -state.psi
    if direction == 0.0:
        return ManeuverMode.KEEP
    return ManeuverMode.CHANGE_LEFT if direction > 0 else ManeuverMode.CHANGE_RIGHT
