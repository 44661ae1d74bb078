from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Type

from src.predictors.base import Predictor
from src.predictors.constant_velocity import ConstantVelocityPredictor
from src.predictors.external import ExternalPredictor
from src.predictors.ground_truth import GroundTruthPredictor

PREDICTOR_TYPES: Dict[str, Type[Predictor]] = {
    "cv": ConstantVelocityPredictor,
    "oracle": GroundTruthPredictor,
    "external": ExternalPredictor,
}


@dataclass(frozen=True)
class PredictorSettings:
    """
    Predictor section of the configuration.

    Attributes:
        kind: One of PREDICTOR_TYPES
        T_obs: Observation window length (steps)
        T_pred: Rows predicted per call (steps)
        command: Server command for the external predictor (None runs the bundled server)
        deadline: Response deadline of the external predictor (s)
        pool_size: External server processes
        startup_timeout: Handshake deadline per server (s)
    """
    kind: str = "oracle"
    T_obs: int = 8
    T_pred: int = 2
    command: Optional[Tuple[str, ...]] = None
    deadline: float = 0.05
    pool_size: int = 2
    startup_timeout: float = 10.0


def make_predictor(settings: PredictorSettings, kind: Optional[str] = None) -> Predictor:
    """
    Create a predictor from settings.

    Args:
        settings: Predictor settings
        kind: Overrides settings.kind

    Returns:
        New predictor instance
    """
    kind = kind or settings.kind
    if kind not in PREDICTOR_TYPES:
        raise ValueError(f"unknown predictor '{kind}', expected one of {sorted(PREDICTOR_TYPES)}")
    if kind == "external":
        return ExternalPredictor(settings.T_obs, settings.T_pred, command=settings.command,
                                 deadline=settings.deadline, pool_size=settings.pool_size,
                                 startup_timeout=settings.startup_timeout)
    return PREDICTOR_TYPES[kind](settings.T_obs, settings.T_pred)
