from src.harness.episode import EpisodeResult, StepLog, run_episode
from src.harness.plot_data import emit_plot_data, min_distance_from_trajectory
from src.harness.scenario import Scenario, ScenarioError, ScenarioSettings, build_scenario
