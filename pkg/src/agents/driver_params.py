from dataclasses import dataclass, field, replace
from typing import Dict, Tuple, Union

import numpy as np

from src.environment.dynamics import BodyGeometry

Range = Tuple[float, float]


@dataclass(frozen=True)
class DriverParams:
    """
    Parameter set of one simulated driver.

    Attributes:
        v_ref: Desired speed (m/s)
        T_headway: Safe time headway (s)
        a_max: Maximum acceleration (m/s^2)
        b_comf: Comfortable deceleration (m/s^2)
        delta_exp: IDM acceleration exponent
        s0: Minimum gap to the leader (m)
        eta_c: Cooperativeness, probability of yielding in the selective zone
        eta_p: Perception-range perturbation (m), may be negative
        geom: Body dimensions
    """
    v_ref: float
    T_headway: float
    a_max: float
    b_comf: float
    delta_exp: float
    s0: float
    eta_c: float
    eta_p: float
    geom: BodyGeometry = field(default_factory=BodyGeometry)

    def with_cooperativeness(self, eta_c: float) -> "DriverParams":
        return replace(self, eta_c=eta_c)


@dataclass(frozen=True)
class DriverRanges:
    """Uniform sampling ranges for every driver parameter (lo, hi)."""
    v_ref: Range = (2.0, 5.0)
    T: Range = (1.0, 2.0)
    a_max: Range = (2.5, 3.5)
    b: Range = (1.5, 2.5)
    delta: Range = (3.5, 4.5)
    s0: Range = (1.0, 3.0)
    eta_c: Range = (0.0, 1.0)
    eta_p: Range = (-0.15, 0.15)

    def items(self) -> Dict[str, Range]:
        return {
            "v_ref": self.v_ref, "T": self.T, "a_max": self.a_max, "b": self.b,
            "delta": self.delta, "s0": self.s0, "eta_c": self.eta_c, "eta_p": self.eta_p,
        }

    @property
    def midpoint(self) -> Dict[str, float]:
        return {name: 0.5 * (lo + hi) for name, (lo, hi) in self.items().items()}


def _uniform(rng: np.random.Generator, bounds: Range) -> float:
    lo, hi = bounds
    if lo == hi:
        return float(lo)
    return float(rng.uniform(lo, hi))


def sample_driver(rng: Union[int, np.random.Generator],
                  ranges: DriverRanges = DriverRanges(),
                  geom: BodyGeometry = BodyGeometry()) -> DriverParams:
    """
    Draw one driver's parameters, each independently uniform on its range.

    Args:
        rng: Seed or generator; a seed always produces the same driver
        ranges: Sampling ranges
        geom: Body dimensions (fixed across the population)

    Returns:
        Sampled DriverParams
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    # draw order is part of the replay contract
    return DriverParams(
        v_ref=_uniform(rng, ranges.v_ref),
        T_headway=_uniform(rng, ranges.T),
        a_max=_uniform(rng, ranges.a_max),
        b_comf=_uniform(rng, ranges.b),
        delta_exp=_uniform(rng, ranges.delta),
        s0=_uniform(rng, ranges.s0),
        eta_c=_uniform(rng, ranges.eta_c),
        eta_p=_uniform(rng, ranges.eta_p),
        geom=geom,
    )


def midpoint_driver(ranges: DriverRanges = DriverRanges(),
                    geom: BodyGeometry = BodyGeometry()) -> DriverParams:
    """Driver at the center of every range."""
    mid = ranges.midpoint
    return DriverParams(
        v_ref=mid["v_ref"], T_headway=mid["T"], a_max=mid["a_max"], b_comf=mid["b"],
        delta_exp=mid["delta"], s0=mid["s0"], eta_c=mid["eta_c"], eta_p=mid["eta_p"],
        geom=geom,
    )
