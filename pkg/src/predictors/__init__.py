from src.predictors.base import (ObservationWindow, PredictionSheet, Predictor,
                                 PredictorTimeoutError, ShapeMismatchError, WindowNotReadyError)
from src.predictors.constant_velocity import ConstantVelocityPredictor
from src.predictors.ground_truth import GroundTruthPredictor
from src.predictors.history import HistoryBuffer
from src.predictors.metrics import ade_fde
from src.predictors.registry import PredictorSettings, make_predictor
