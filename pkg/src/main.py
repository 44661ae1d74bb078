import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from src.harness.batch import run_batch
from src.harness.episode import EpisodeResult, run_episode
from src.harness.plot_data import emit_plot_data, trajectory_frame
from src.predictors.export import export_training_batch
from src.predictors.registry import PREDICTOR_TYPES
from src.utils.config import Config, ConfigError
from src.utils.logger import setup_logging
from src.utils.manifest import write_manifest
from src.utils.seeding import SeedStreams
from src.visualization.plots import plot_controls, plot_positions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

REGIME_CHOICES = ["coop", "mixed", "agg"]


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Path to configuration file")
    common.add_argument("--seed", type=int, help="Root seed (first seed for batches)")
    common.add_argument("--out", type=str, default="runs/latest", help="Output directory")
    common.add_argument("--workers", type=int, help="Worker pool width")
    common.add_argument("--log-level", type=str, help="Override logging.log_level")

    parser = argparse.ArgumentParser(description="Dense-traffic merge simulation with rollout MPC")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Simulate one episode")
    run.add_argument("--predictor", choices=sorted(PREDICTOR_TYPES), help="Predictor kind")
    run.add_argument("--regime", choices=REGIME_CHOICES, help="Driver cooperativeness regime")
    run.add_argument("--plots", action="store_true", help="Also write PNG plots")

    batch = sub.add_parser("batch", parents=[common], help="Monte Carlo grid of regimes x predictors")
    batch.add_argument("--predictor", choices=sorted(PREDICTOR_TYPES), action="append",
                       help="Predictor column (repeatable; default cv and oracle)")
    batch.add_argument("--regime", choices=REGIME_CHOICES, action="append",
                       help="Regime row (repeatable; default all)")
    batch.add_argument("--episodes", type=int, help="Episodes per cell")
    batch.add_argument("--no-progress", action="store_true", help="Hide the progress bar")

    export = sub.add_parser("export-training", parents=[common], help="Write predictor training windows")
    export.add_argument("--predictor", choices=sorted(PREDICTOR_TYPES), help="Predictor driving the ego")
    export.add_argument("--regime", choices=REGIME_CHOICES, help="Driver cooperativeness regime")
    export.add_argument("--episodes", type=int, default=1, help="Episodes to export")

    sub.add_parser("check", parents=[common], help="Validate a configuration file")
    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> Config:
    """Configuration file plus command line overrides."""
    overrides = {}
    if args.seed is not None:
        overrides.setdefault("scenario", {})["seed"] = args.seed
    if getattr(args, "episodes", None) is not None and args.command == "batch":
        overrides.setdefault("scenario", {})["episodes"] = args.episodes
    if args.workers is not None:
        overrides.setdefault("controller", {})["workers"] = args.workers
    if isinstance(getattr(args, "predictor", None), str):
        overrides.setdefault("predictor", {})["kind"] = args.predictor
    if isinstance(getattr(args, "regime", None), str):
        overrides.setdefault("scenario", {})["regime"] = args.regime
    if args.log_level:
        overrides.setdefault("logging", {})["log_level"] = args.log_level
    return Config(args.config, overrides=overrides)


def print_episode_summary(result: EpisodeResult):
    """
    Print a summary of one episode.

    Args:
        result: Finished episode
    """
    print("\n=== Episode Summary ===")
    print(f"Seed: {result.seed}  regime: {result.regime}  predictor: {result.predictor}")
    print(f"Success: {result.success}")
    if result.time_to_merge is not None:
        print(f"Time to merge: {result.time_to_merge:.1f} s")
    print(f"Min distance: {result.min_distance:.3f} m")
    print(f"Collision: {result.collision}")
    print(f"Solver steps: {len(result.steps)}, feasible fraction {result.feasible_fraction:.2f}")
    if result.steps:
        latencies = sorted(s.latency for s in result.steps)
        print(f"Solver latency: median {latencies[len(latencies) // 2] * 1000:.1f} ms, "
              f"max {latencies[-1] * 1000:.1f} ms")


def command_run(config: Config, args: argparse.Namespace) -> int:
    out = Path(args.out)
    write_manifest(config, config.seed, out, command="run",
                   outputs={"trajectory": "trajectory.csv", "controls": "controls.csv"})
    scenario = config.build_scenario()
    result = run_episode(scenario, config.predictor_kind, config.controller_config(), config.predictor_settings())
    paths = emit_plot_data(result, out)

    if args.plots:
        controller = config.controller_config()
        plot_positions(trajectory_frame(result), scenario.road, out / "positions.png")
        plot_controls(
            pd.read_csv(paths["controls"]), out / "controls.png",
            bounds={"a_min": controller.a_min, "a_max": controller.a_max,
                    "delta_min": controller.delta_min, "delta_max": controller.delta_max})

    print_episode_summary(result)
    return EXIT_OK


def command_batch(config: Config, args: argparse.Namespace) -> int:
    regimes = args.regime or REGIME_CHOICES
    predictors = args.predictor or ["cv", "oracle"]
    out = Path(args.out)
    write_manifest(config, config.seed, out, command="batch", predictor=",".join(predictors),
                   regime=",".join(regimes),
                   outputs={"summary": "summary.csv", "episodes": "episodes.csv", "table": "summary.txt"})
    summary = run_batch(config, regimes, predictors, config.episodes, config.seed,
                        workers=config.workers, progress=not args.no_progress)
    summary.save(out)
    print(summary.to_table())
    return EXIT_OK


def command_export(config: Config, args: argparse.Namespace) -> int:
    out = Path(args.out)
    write_manifest(config, config.seed, out, command="export-training")
    settings = config.predictor_settings()
    noise = float(config.get("predictor.export_noise", 0.0))
    total = 0
    for i in range(args.episodes):
        seed = config.seed + i
        scenario = config.build_scenario(seed=seed)
        result = run_episode(scenario, config.predictor_kind, config.controller_config(), settings)
        total += export_training_batch(
            trajectory_frame(result), out / f"training_{seed}.csv", settings.T_obs, settings.T_pred,
            noise=noise, rng=SeedStreams(seed).generator("export"))
    print(f"Exported {total} windows from {args.episodes} episode(s) to {out}")
    return EXIT_OK


def command_check(config: Config, args: argparse.Namespace) -> int:
    for key in config.unknown_keys:
        print(f"warning: unknown key {key}")
    print(f"{args.config or 'defaults'}: OK")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "batch": command_batch,
    "export-training": command_export,
    "check": command_check,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = parse_args(argv)

    try:
        config = load_config(args)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG

    setup_logging(config.log_level, config.log_file)
    if not config.get("logging.log_steps", True):
        logging.getLogger("src.controller.mpc").setLevel(logging.WARNING)
    try:
        return COMMANDS[args.command](config, args)
    except Exception:
        logger.exception("run failed", extra={"event": "failure", "fields": {"command": args.command}})
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
