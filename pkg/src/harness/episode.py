import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

from src.controller.mpc import RolloutController
from src.controller.params import ControllerConfig
from src.environment.geometry import euclidean_min_gap
from src.environment.snapshot import TrafficSnapshot, VehicleRole
from src.harness.scenario import Scenario
from src.predictors.history import HistoryBuffer
from src.predictors.registry import PredictorSettings, make_predictor
from src.utils.seeding import SeedStreams

logger = logging.getLogger(__name__)


@dataclass
class StepLog:
    """One solver step of an episode."""
    step: int
    t: float
    x: float
    y: float
    psi: float
    v: float
    a: float
    delta: float
    mode: str
    cost: float
    feasible: int
    candidates: int
    fallback: bool
    latency: float
    min_gap: float


@dataclass
class EpisodeResult:
    """
    Outcome of one episode.

    success holds exactly when the merge completed within the time limit.
    """
    seed: int
    regime: str
    predictor: str
    success: bool
    time_to_merge: Optional[float]
    min_distance: float
    collision: bool
    duration: float
    steps: List[StepLog] = field(default_factory=list)
    trajectory: List[Dict] = field(default_factory=list)

    @property
    def feasible_fraction(self) -> float:
        total = sum(s.candidates for s in self.steps)
        return sum(s.feasible for s in self.steps) / total if total else float("nan")

    def to_record(self) -> Dict:
        """Flat summary without the per-step logs."""
        return {
            "seed": self.seed,
            "regime": self.regime,
            "predictor": self.predictor,
            "success": self.success,
            "time_to_merge": self.time_to_merge,
            "min_distance": self.min_distance,
            "collision": self.collision,
            "duration": self.duration,
            "steps": len(self.steps),
            "feasible_fraction": self.feasible_fraction,
            "rejected": False,
        }


def ego_min_gap(snapshot: TrafficSnapshot) -> float:
    """Smallest clearance (m) between the ego and any other vehicle."""
    ego = snapshot.ego()
    gaps = [euclidean_min_gap(ego.state, ego.geom, other.state, other.geom)
            for other in snapshot.others(ego.vehicle_id)]
    return min(gaps) if gaps else math.inf


def _trajectory_rows(snapshot: TrafficSnapshot) -> List[Dict]:
    return [{
        "t": snapshot.time, "step": snapshot.tick, "vehicle_id": view.vehicle_id,
        "role": view.role.value, "x": view.state.x, "y": view.state.y,
        "psi": view.state.psi, "v": view.state.v,
    } for view in snapshot.vehicles]


def run_episode(scenario: Scenario, predictor_kind: str,
                controller_config: ControllerConfig = ControllerConfig(),
                predictor_settings: PredictorSettings = PredictorSettings(),
                record_trajectory: bool = True) -> EpisodeResult:
    """
    Simulate one merge attempt.

    Each tick the ego plans with the rollout controller and every driver acts
    on the same snapshot. The episode ends when the merge completes, on
    contact, or at the time limit.

    Args:
        scenario: Initial scene
        predictor_kind: "cv", "oracle" or "external"
        controller_config: Controller configuration
        predictor_settings: Predictor configuration
        record_trajectory: Keep every vehicle's state at every tick

    Returns:
        EpisodeResult
    """
    settings = scenario.settings
    streams = SeedStreams(scenario.seed)
    world = scenario.build_world(controller_config.dt, streams)
    target_y = world.road.lane_center(settings.target_lane)
    if controller_config.y_min is None and controller_config.y_max is None:
        y_min, y_max = world.road.lateral_bounds()
        controller_config = replace(controller_config, y_min=y_min, y_max=y_max)

    predictor = make_predictor(predictor_settings, predictor_kind)
    history = HistoryBuffer(predictor.t_obs)
    controller = RolloutController(controller_config, scenario.geom,
                                   streams.generator("controller"), other_geom=scenario.geom)

    steps: List[StepLog] = []
    trajectory: List[Dict] = []
    min_distance = math.inf
    collision = False
    streak = 0
    time_to_merge = None

    try:
        while True:
            snapshot = world.snapshot()
            history.record(snapshot)
            if record_trajectory:
                trajectory.extend(_trajectory_rows(snapshot))

            gap = ego_min_gap(snapshot)
            min_distance = min(min_distance, gap)
            if gap <= 0.0:
                collision = True
                logger.warning("collision", extra={"event": "collision", "fields": {
                    "seed": scenario.seed, "t": snapshot.time}})
                break

            ego = snapshot.ego().state
            captured = (abs(ego.y - target_y) < controller_config.capture_tolerance_y
                        and abs(ego.psi) < controller_config.capture_tolerance_psi)
            streak = streak + 1 if captured else 0
            if streak >= settings.merge_hold_steps:
                time_to_merge = snapshot.time - (settings.merge_hold_steps - 1) * world.dt
                break
            if world.time_system.is_expired():
                break

            predictor.observe(world)
            result = controller.solve(history.window(), ego, target_y, predictor,
                                      tick=snapshot.tick, t=snapshot.time)
            steps.append(StepLog(
                step=snapshot.tick, t=snapshot.time, x=ego.x, y=ego.y, psi=ego.psi, v=ego.v,
                a=result.control.a, delta=result.control.delta, mode=result.mode.value,
                cost=result.cost, feasible=result.feasible_count, candidates=len(result.candidates),
                fallback=result.fallback, latency=result.latency, min_gap=gap))
            world.step(ego_control=result.control)
    finally:
        controller.close()
        predictor.close()

    success = time_to_merge is not None
    logger.info("episode finished", extra={"event": "episode", "fields": {
        "seed": scenario.seed, "regime": scenario.regime.value, "predictor": predictor_kind,
        "success": success, "time_to_merge": time_to_merge, "min_distance": min_distance,
        "collision": collision}})
    return EpisodeResult(
        seed=scenario.seed, regime=scenario.regime.value, predictor=predictor_kind,
        success=success, time_to_merge=time_to_merge, min_distance=min_distance,
        collision=collision, duration=world.time_system.get_time(),
        steps=steps, trajectory=trajectory)


def step_records(result: EpisodeResult) -> List[Dict]:
    return [asdict(s) for s in result.steps]
