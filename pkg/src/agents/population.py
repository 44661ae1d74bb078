from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.agents.driver import Driver, DriverSettings
from src.agents.driver_params import DriverParams, DriverRanges, sample_driver
from src.environment.dynamics import BodyGeometry


class Regime(Enum):
    """Cooperativeness of the whole driver population"""
    COOPERATIVE = "coop"
    MIXED = "mixed"
    AGGRESSIVE = "agg"

    @classmethod
    def parse(cls, value) -> "Regime":
        if isinstance(value, Regime):
            return value
        aliases = {"cooperative": "coop", "aggressive": "agg"}
        return cls(aliases.get(str(value).lower(), str(value).lower()))

    def apply(self, params: DriverParams) -> DriverParams:
        """Override eta_c according to the regime (mixed keeps the sampled value)."""
        if self == Regime.COOPERATIVE:
            return params.with_cooperativeness(1.0)
        if self == Regime.AGGRESSIVE:
            return params.with_cooperativeness(0.0)
        return params


@dataclass(frozen=True)
class Population:
    """Everything needed to create a new simulated driver."""
    ranges: DriverRanges = field(default_factory=DriverRanges)
    regime: Regime = Regime.MIXED
    geom: BodyGeometry = field(default_factory=BodyGeometry)
    settings: DriverSettings = field(default_factory=DriverSettings)

    def make_driver(self, vehicle_id: int, lane: int, rng: np.random.Generator) -> Driver:
        """
        Sample a driver and bind it to a vehicle.

        Args:
            vehicle_id: Id of the controlled vehicle
            lane: Starting lane
            rng: The driver's own stream; used for parameters first, then behaviour

        Returns:
            New Driver
        """
        params = self.regime.apply(sample_driver(rng, self.ranges, self.geom))
        return Driver(vehicle_id, params, lane, rng, self.settings)
