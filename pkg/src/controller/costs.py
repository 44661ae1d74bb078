from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from src.controller.params import ControllerConfig
from src.environment.dynamics import VehicleState

MIN_DISTANCE_TO_END = 0.1


def lane_divergence_weight(x: float, x_end: float, scale: float = 1.0) -> float:
    """
    Weight of the lateral offset term; grows as the ego nears the lane end.

    Args:
        x: Ego longitudinal position (m)
        x_end: End of the merging lane (m)
        scale: Multiplier (lambda_div)

    Returns:
        scale / |x_end - x|, with the distance clamped below at 0.1 m
    """
    return scale / max(x_end - x, MIN_DISTANCE_TO_END)


@dataclass(frozen=True)
class CostBreakdown:
    divergence: float = 0.0
    speed: float = 0.0
    steering: float = 0.0
    accel: float = 0.0
    steering_rate: float = 0.0
    jerk: float = 0.0

    @property
    def total(self) -> float:
        return (self.divergence + self.speed + self.steering + self.accel
                + self.steering_rate + self.jerk)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["total"] = self.total
        return data


def stage_costs(states: Sequence[VehicleState], controls: np.ndarray,
                config: ControllerConfig, target_y: float) -> CostBreakdown:
    """
    Cost of one ego trajectory, term by term.

    State terms run over all T + 1 states, input terms over the T inputs and
    input differences over the T - 1 consecutive pairs.

    Args:
        states: Ego states, current state first
        controls: (T, 2) inputs as [a, delta]
        config: Weights and references
        target_y: Lateral position of the target lane center

    Returns:
        CostBreakdown
    """
    controls = np.asarray(controls, dtype=float).reshape(-1, 2)
    if len(states) != len(controls) + 1:
        raise ValueError(f"expected {len(controls) + 1} states for {len(controls)} inputs, got {len(states)}")

    x = np.array([s.x for s in states])
    y = np.array([s.y for s in states])
    v = np.array([s.v for s in states])
    a, delta = controls[:, 0], controls[:, 1]

    weights = np.array([lane_divergence_weight(xi, config.x_end, config.lambda_div) for xi in x])
    return CostBreakdown(
        divergence=float(np.sum(weights * np.abs(y - target_y))),
        speed=float(config.lambda_v * np.sum((v - config.v_ref) ** 2)),
        steering=float(config.lambda_delta * np.sum(delta ** 2)),
        accel=float(config.lambda_a * np.sum(a ** 2)),
        steering_rate=float(config.lambda_Delta_delta * np.sum(np.diff(delta) ** 2)),
        jerk=float(config.lambda_Delta_a * np.sum(np.diff(a) ** 2)),
    )
