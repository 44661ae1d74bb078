from dataclasses import dataclass, fields
from typing import List, Optional

SAMPLING_MODES = ("iid", "hold")


@dataclass(frozen=True)
class ControllerConfig:
    """
    Rollout MPC parameters, named as the keys of the controller config section.

    Attributes:
        T: Horizon length (s)
        N_sim: Number of sampled candidates per step
        dt: Step size (s)
        lambda_div: Scale of the lane-divergence weight
        lambda_v: Speed tracking weight
        lambda_delta: Steering magnitude weight
        lambda_a: Acceleration magnitude weight
        lambda_Delta_delta: Steering rate weight
        lambda_Delta_a: Jerk weight
        delta_min, delta_max: Steering bounds (rad)
        a_min, a_max: Acceleration bounds (m/s^2)
        x_end: End of the merging lane (m)
        v_ref: Reference speed (m/s)
        epsilon: Safety bound on the circle-pair clearance
        alpha: Steering shrink factor of the lane-keep action space
        sampling: "iid" per step, or "hold" one input for the whole horizon
        inject_zero_candidate: Replace candidate 0 with all-zero inputs
        capture_tolerance_y: Lateral offset counted as on the target center (m)
        capture_tolerance_psi: Heading counted as aligned (rad)
        mode_lookahead: Time over which the current heading is projected when
            choosing the maneuver direction (s); 0 uses the lateral offset only
        y_min, y_max: Lateral road edges the ego footprint must stay within (m);
            None leaves that side unbounded
        workers: Candidate evaluation threads
    """
    T: float = 2.8
    N_sim: int = 32
    dt: float = 0.4
    lambda_div: float = 12000.0
    lambda_v: float = 1000.0
    lambda_delta: float = 500.0
    lambda_a: float = 500.0
    lambda_Delta_delta: float = 100.0
    lambda_Delta_a: float = 100.0
    delta_min: float = -0.3
    delta_max: float = 0.3
    a_min: float = -4.0
    a_max: float = 3.5
    x_end: float = 50.0
    v_ref: float = 10.0
    epsilon: float = 0.1
    alpha: float = 0.1
    sampling: str = "iid"
    inject_zero_candidate: bool = False
    capture_tolerance_y: float = 0.2
    capture_tolerance_psi: float = 0.05
    mode_lookahead: float = 1.4
    y_min: Optional[float] = None
    y_max: Optional[float] = None
    workers: int = 4

    @property
    def horizon(self) -> int:
        """Horizon in steps."""
        return max(1, int(round(self.T / self.dt)))

    @property
    def weights(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name.startswith("lambda_")}

    def validate(self) -> List[str]:
        """
        Check the invariants of the configuration.

        Returns:
            One message per violation, empty when valid
        """
        errors = []
        for name, value in self.weights.items():
            if value < 0:
                errors.append(f"controller.{name}: weight must be >= 0, got {value}")
        if self.delta_min > self.delta_max:
            errors.append(f"controller.delta_min/controller.delta_max: delta_min ({self.delta_min}) "
                          f"exceeds delta_max ({self.delta_max})")
        if self.a_min > self.a_max:
            errors.append(f"controller.a_min/controller.a_max: a_min ({self.a_min}) exceeds a_max ({self.a_max})")
        if self.N_sim < 1:
            errors.append(f"controller.N_sim: must be >= 1, got {self.N_sim}")
        if self.dt <= 0:
            errors.append(f"controller.dt: must be > 0, got {self.dt}")
        if self.T <= 0:
            errors.append(f"controller.T: must be > 0, got {self.T}")
        if not 0.0 <= self.alpha <= 1.0:
            errors.append(f"controller.alpha: must lie in [0, 1], got {self.alpha}")
        if self.epsilon < 0:
            errors.append(f"controller.epsilon: must be >= 0, got {self.epsilon}")
        if self.sampling not in SAMPLING_MODES:
            errors.append(f"controller.sampling: expected one of {SAMPLING_MODES}, got '{self.sampling}'")
        if self.workers < 1:
            errors.append(f"controller.workers: must be >= 1, got {self.workers}")
        if self.v_ref < 0:
            errors.append(f"controller.v_ref: must be >= 0, got {self.v_ref}")
        if self.mode_lookahead < 0:
            errors.append(f"controller.mode_lookahead: must be >= 0, got {self.mode_lookahead}")
        if self.y_min is not None and self.y_max is not None and self.y_min >= self.y_max:
            errors.append(f"controller.y_min/controller.y_max: y_min ({self.y_min}) "
                          f"must be below y_max ({self.y_max})")
        return errors
