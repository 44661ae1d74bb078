import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.harness.episode import run_episode
from src.harness.scenario import ScenarioError
from src.utils.config import Config

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "regime", "predictor", "episodes", "success_rate", "time_to_merge_mean", "time_to_merge_std",
    "min_distance_mean", "min_distance_std", "collisions", "feasible_fraction", "rejected",
]


@dataclass(frozen=True)
class EpisodeTask:
    regime: str
    predictor: str
    seed: int


def rejected_record(task: EpisodeTask) -> Dict:
    """Record of a seed whose scene could not be placed."""
    return {"seed": task.seed, "regime": task.regime, "predictor": task.predictor, "success": False,
            "time_to_merge": None, "min_distance": float("nan"), "collision": False,
            "duration": 0.0, "steps": 0, "feasible_fraction": float("nan"), "rejected": True}


def run_task(config_data: Dict, task: EpisodeTask) -> Dict:
    """
    Run one episode in a worker process and return its flat record.

    A seed without a valid placement is logged and returned as a rejected
    record instead of failing the batch.
    """
    config = Config.from_dict(config_data)
    try:
        scenario = config.build_scenario(task.regime, task.seed)
    except ScenarioError as e:
        logger.warning("seed rejected", extra={"event": "seed_rejected", "fields": {
            "seed": task.seed, "regime": task.regime, "predictor": task.predictor, "error": str(e)}})
        return rejected_record(task)
    result = run_episode(scenario, task.predictor, config.controller_config(),
                         config.predictor_settings(), record_trajectory=False)
    return result.to_record()


def _std(values: pd.Series) -> float:
    return float(np.std(values.to_numpy(dtype=float), ddof=0)) if len(values) else float("nan")


class BatchSummary:
    """
    Aggregated Monte Carlo results, one cell per (regime, predictor).

    Rejected seeds are counted per cell and left out of every other column.
    Time to merge is averaged over successful episodes only; standard
    deviations are population deviations.
    """

    def __init__(self, records: pd.DataFrame):
        self.records = records.sort_values(["regime", "predictor", "seed"]).reset_index(drop=True)

    @classmethod
    def from_records(cls, records: Sequence[Dict]) -> "BatchSummary":
        return cls(pd.DataFrame(list(records)))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for (regime, predictor), group in self.records.groupby(["regime", "predictor"], sort=True):
            if "rejected" in group:
                rejected = group["rejected"].astype(bool)
            else:
                rejected = pd.Series(False, index=group.index)
            cell = group.loc[~rejected]
            merged = cell.loc[cell["success"].astype(bool), "time_to_merge"].astype(float)
            rows.append({
                "regime": regime,
                "predictor": predictor,
                "episodes": len(cell),
                "success_rate": 100.0 * float(cell["success"].astype(bool).mean()) if len(cell) else float("nan"),
                "time_to_merge_mean": float(merged.mean()) if len(merged) else float("nan"),
                "time_to_merge_std": _std(merged),
                "min_distance_mean": float(cell["min_distance"].astype(float).mean()),
                "min_distance_std": _std(cell["min_distance"].astype(float)),
                "collisions": int(cell["collision"].astype(bool).sum()),
                "feasible_fraction": float(cell["feasible_fraction"].astype(float).mean()),
                "rejected": int(rejected.sum()),
            })
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    def cell(self, regime: str, predictor: str) -> Dict:
        frame = self.to_frame()
        match = frame[(frame["regime"] == regime) & (frame["predictor"] == predictor)]
        if match.empty:
            raise KeyError(f"no cell ({regime}, {predictor})")
        return match.iloc[0].to_dict()

    def to_table(self) -> str:
        """Human-readable table."""
        frame = self.to_frame()
        lines = [f"{'regime':<8} {'predictor':<9} {'n':>4} {'success':>8} {'time to merge [s]':>18} "
                 f"{'min distance [m]':>17} {'coll':>5} {'rej':>4}"]
        for row in frame.itertuples(index=False):
            lines.append(
                f"{row.regime:<8} {row.predictor:<9} {row.episodes:>4d} {row.success_rate:>7.1f}% "
                f"{row.time_to_merge_mean:>8.2f} ± {row.time_to_merge_std:<7.2f} "
                f"{row.min_distance_mean:>7.2f} ± {row.min_distance_std:<7.2f} {row.collisions:>5d} {row.rejected:>4d}")
        return "\n".join(lines)

    def save(self, out_dir: Union[str, Path]) -> Dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {"summary": out_dir / "summary.csv", "episodes": out_dir / "episodes.csv",
                 "table": out_dir / "summary.txt"}
        self.to_frame().to_csv(paths["summary"], index=False, lineterminator="\n")
        self.records.to_csv(paths["episodes"], index=False, lineterminator="\n")
        paths["table"].write_text(self.to_table() + "\n", encoding="utf-8")
        return paths


def run_batch(config: Config, regimes: Sequence[str], predictors: Sequence[str],
              episodes: int, base_seed: int, workers: Optional[int] = None,
              progress: bool = True) -> BatchSummary:
    """
    Run the Monte Carlo grid.

    Episode i of every cell uses seed base_seed + i, so all predictor columns
    (and regimes) face the same initial scenes.

    Args:
        config: Run configuration
        regimes: Regime names
        predictors: Predictor kinds
        episodes: Episodes per cell, at least 1
        base_seed: Seed of the first episode
        workers: Episode processes (defaults to the configured worker count)
        progress: Show a tqdm progress bar

    Returns:
        BatchSummary
    """
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    tasks = [EpisodeTask(regime, predictor, base_seed + i)
             for regime in regimes for predictor in predictors for i in range(episodes)]
    workers = workers or config.workers
    data = config.to_dict()
    records: List[Dict] = []

    bar = tqdm(total=len(tasks), desc="episodes", disable=not progress)
    if workers <= 1:
        for task in tasks:
            records.append(run_task(data, task))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_task, data, task) for task in tasks]
            for future in as_completed(futures):
                records.append(future.result())
                bar.update(1)
    bar.close()

    summary = BatchSummary.from_records(records)
    logger.info("batch finished", extra={"event": "batch", "fields": {
        "episodes": len(records), "rejected": sum(bool(r.get("rejected")) for r in records),
        "cells": len(regimes) * len(predictors), "base_seed": base_seed}})
    return summary
