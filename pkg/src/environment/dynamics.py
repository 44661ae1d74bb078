import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class VehicleState:
    """
    Pose and speed of one vehicle: z = [x, y, psi, v].

    x and y are the center coordinates in meters, psi the inertial heading in
    radians (left of the road axis is positive) and v the speed in m/s.
    """
    x: float
    y: float
    psi: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi, self.v], dtype=float)

    @classmethod
    def from_array(cls, values) -> "VehicleState":
        return cls(float(values[0]), float(values[1]), float(values[2]), float(values[3]))

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def mirrored(self) -> "VehicleState":
        """Reflect the state about the road axis (y -> -y, psi -> -psi)."""
        return replace(self, y=-self.y, psi=-self.psi)


@dataclass(frozen=True)
class ControlInput:
    """Acceleration a (m/s^2) and front-wheel steering angle delta (rad)."""
    a: float
    delta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.delta], dtype=float)


@dataclass(frozen=True)
class BodyGeometry:
    """
    Physical dimensions of a vehicle.

    Attributes:
        l_f: Center to front axle distance (m)
        l_r: Center to rear axle distance (m)
        w: Half width (m)
        h: Half length (m)
    """
    l_f: float = 1.45
    l_r: float = 1.45
    w: float = 0.9
    h: float = 2.0

    def validate(self) -> None:
        for name in ("l_f", "l_r", "w", "h"):
            if getattr(self, name) <= 0:
                raise ValueError(f"BodyGeometry.{name} must be positive")
        if self.h <= self.w:
            raise ValueError("BodyGeometry requires h > w")

    @property
    def length(self) -> float:
        return 2.0 * self.h


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def slip_angle(geom: BodyGeometry, delta: float) -> float:
    """
    Slip angle of the center of mass.

    Args:
        geom: Vehicle dimensions
        delta: Front-wheel steering angle, |delta| < pi/2

    Returns:
        beta = atan(l_r / (l_f + l_r) * tan(delta))
    """
    return math.atan(geom.l_r / (geom.l_f + geom.l_r) * math.tan(delta))


def derivative(state: VehicleState, control: ControlInput,
               geom: BodyGeometry) -> Tuple[float, float, float, float]:
    """
    Continuous-time kinematic bicycle model.

    Args:
        state: Current vehicle state
        control: Applied input
        geom: Vehicle dimensions

    Returns:
        Tuple (x_dot, y_dot, psi_dot, v_dot)
    """
    beta = slip_angle(geom, control.delta)
    x_dot = state.v * math.cos(state.psi + beta)
    y_dot = state.v * math.sin(state.psi + beta)
    psi_dot = state.v / geom.l_r * math.sin(beta)
    return (x_dot, y_dot, psi_dot, control.a)


def step(state: VehicleState, control: ControlInput, geom: BodyGeometry,
         dt: float) -> VehicleState:
    """
    One forward-Euler step of the bicycle model.

    Speed is clamped at zero after integration (vehicles stop, never reverse)
    and the heading is wrapped into (-pi, pi].

    Args:
        state: State at time t
        control: Input held over [t, t + dt)
        geom: Vehicle dimensions
        dt: Step size in seconds, must be positive

    Returns:
        State at time t + dt
    """
    if dt <= 0:
        raise ValueError("dt must be positive")

    x_dot, y_dot, psi_dot, v_dot = derivative(state, control, geom)
    return VehicleState(
        x=state.x + dt * x_dot,
        y=state.y + dt * y_dot,
        psi=normalize_angle(state.psi + dt * psi_dot),
        v=max(0.0, state.v + dt * v_dot),
    )


def propagate(state: VehicleState, controls, geom: BodyGeometry, dt: float):
    """Roll a control sequence forward; returns the len(controls) + 1 visited states."""
    states = [state]
    for control in controls:
        states.append(step(states[-1], control, geom, dt))
    return states
