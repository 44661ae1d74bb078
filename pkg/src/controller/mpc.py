import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.controller.params import ControllerConfig
from src.controller.rollout import RolloutCandidate, evaluate_candidate
from src.controller.sampling import ManeuverMode, sample_candidates, select_mode
from src.environment.dynamics import BodyGeometry, ControlInput, VehicleState
from src.predictors.base import ObservationWindow, Predictor

logger = logging.getLogger(__name__)


@dataclass
class SolveResult:
    """Everything one solver call looked at."""
    control: ControlInput
    mode: ManeuverMode
    candidates: List[RolloutCandidate] = field(default_factory=list)
    chosen: Optional[int] = None
    latency: float = 0.0

    @property
    def fallback(self) -> bool:
        return self.chosen is None

    @property
    def feasible_count(self) -> int:
        return sum(1 for c in self.candidates if c.feasible)

    @property
    def cost(self) -> float:
        return self.candidates[self.chosen].cost if self.chosen is not None else float("inf")


def select_best(candidates: List[RolloutCandidate]) -> Optional[int]:
    """Index of the cheapest feasible candidate; ties go to the lowest index."""
    best = None
    for candidate in sorted(candidates, key=lambda c: c.index):
        if candidate.feasible and (best is None or candidate.cost < best.cost):
            best = candidate
    return None if best is None else best.index


class RolloutController:
    """
    Sampling-based MPC.

    Every step draws N_sim input sequences from the current maneuver's action
    box, evaluates them in parallel against the predictor, and applies the
    first input of the cheapest feasible one. With no feasible candidate the
    ego brakes straight at a_min.
    """

    def __init__(self, config: ControllerConfig, ego_geom: BodyGeometry,
                 rng: np.random.Generator, other_geom: Optional[BodyGeometry] = None):
        """
        Initialize the controller.

        Args:
            config: Controller configuration
            ego_geom: Ego dimensions
            rng: Controller random stream
            other_geom: Nominal geometry of the other vehicles
        """
        self.config = config
        self.ego_geom = ego_geom
        self.other_geom = other_geom or ego_geom
        self.rng = rng
        self.calls = 0
        self._pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None

    @property
    def fallback_input(self) -> ControlInput:
        return ControlInput(self.config.a_min, 0.0)

    def solve(self, window: ObservationWindow, ego_state: VehicleState, target_y: float,
              predictor: Predictor, mode: Optional[ManeuverMode] = None,
              tick: Optional[int] = None, t: Optional[float] = None) -> SolveResult:
        """
        Run one receding-horizon step.

        Args:
            window: Observation window at the current tick
            ego_state: Current ego state
            target_y: Target lane center
            predictor: Predictor; each candidate gets its own clone
            mode: Maneuver mode (selected from the ego state when None)
            tick: Simulation tick, recorded in the step log
            t: Simulation time (s), recorded in the step log

        Returns:
            SolveResult with all evaluated candidates
        """
        started = time.perf_counter()
        mode = mode or select_mode(ego_state, target_y, self.config)
        sequences = sample_candidates(mode, self.config, self.rng)

        def evaluate(index: int) -> RolloutCandidate:
            return evaluate_candidate(index, sequences[index], ego_state, self.ego_geom, window,
                                      predictor.clone(), self.config, target_y, self.other_geom)

        indices = range(len(sequences))
        if self._pool is not None:
            candidates = list(self._pool.map(evaluate, indices))
        else:
            candidates = [evaluate(i) for i in indices]

        chosen = select_best(candidates)
        control = candidates[chosen].first_input if chosen is not None else self.fallback_input
        result = SolveResult(control=control, mode=mode, candidates=candidates, chosen=chosen,
                             latency=time.perf_counter() - started)

        logger.info("solve step", extra={"event": "solve_step", "fields": {
            "call": self.calls,
            "tick": tick,
            "t": t,
            "mode": mode.value,
            "cost": result.cost if chosen is not None else None,
            "feasible": result.feasible_count,
            "candidates": len(candidates),
            "fallback": result.fallback,
            "a": control.a,
            "delta": control.delta,
            "latency": result.latency,
        }})
        self.calls += 1
        return result

    def solve_step(self, window: ObservationWindow, ego_state: VehicleState, target_y: float,
                   predictor: Predictor, tick: Optional[int] = None,
                   t: Optional[float] = None) -> ControlInput:
        """First input of the best candidate (or the braking fallback)."""
        return self.solve(window, ego_state, target_y, predictor, tick=tick, t=t).control

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self) -> "RolloutController":
        return self

    def __exit__(self, *exc):
        self.close()
