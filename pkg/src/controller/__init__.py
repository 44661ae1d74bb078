from src.controller.costs import CostBreakdown, lane_divergence_weight, stage_costs
from src.controller.mpc import RolloutController, SolveResult
from src.controller.params import ControllerConfig
from src.controller.rollout import RolloutCandidate, evaluate_candidate
from src.controller.sampling import ManeuverMode, sample_candidates, select_mode
