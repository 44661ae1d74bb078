"""
Run manifests.

Every output directory gets one manifest.yaml, written before the simulation
starts, holding the resolved configuration and everything else needed to
re-run the experiment: seed, predictor, regime, version stamp, paths.
"""
import subprocess
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

import src
from src.utils.config import Config

MANIFEST_FILE = "manifest.yaml"


class ManifestError(RuntimeError):
    """A manifest is missing, duplicated or unreadable."""


@dataclass
class RunManifest:
    config: Dict[str, Any]
    seed: int
    command: str
    predictor: str
    regime: str
    version: str
    git_commit: Optional[str]
    started_at: str
    out_dir: str
    outputs: Dict[str, str] = field(default_factory=dict)

    def to_config(self) -> Config:
        return Config.from_dict(self.config)


def _git_commit() -> Optional[str]:
    try:
        result = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=2.0,
                                cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return None
    if result.returncode != 0:
        return None
    return result.stdout.strip() or None


def write_manifest(config: Config, seed: int, out_dir: Union[str, Path], command: str = "run",
                   predictor: Optional[str] = None, regime: Optional[str] = None,
                   outputs: Optional[Dict[str, str]] = None) -> RunManifest:
    """
    Persist the manifest of a run.

    Args:
        config: Resolved configuration
        seed: Root seed of the run
        out_dir: Output directory (created if needed)
        command: CLI command that produced the run
        predictor: Predictor kind(s)
        regime: Regime name(s)
        outputs: Planned output files

    Returns:
        RunManifest

    Raises:
        ManifestError: when out_dir already holds a manifest or is not writable
    """
    out_dir = Path(out_dir)
    path = out_dir / MANIFEST_FILE
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ManifestError(f"cannot create {out_dir}: {e}")
    if path.exists():
        raise ManifestError(f"{out_dir} already contains a manifest")

    manifest = RunManifest(
        config=config.to_dict(),
        seed=int(seed),
        command=command,
        predictor=predictor or config.predictor_kind,
        regime=regime or config.regime,
        version=src.__version__,
        git_commit=_git_commit(),
        started_at=datetime.now(timezone.utc).isoformat(),
        out_dir=str(out_dir),
        outputs=dict(outputs or {}),
    )
    try:
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(asdict(manifest), f, default_flow_style=False, sort_keys=False)
    except OSError as e:
        raise ManifestError(f"cannot write {path}: {e}")
    return manifest


def load_manifest(path: Union[str, Path]) -> RunManifest:
    """Read a manifest from a file or a run directory."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ManifestError(f"cannot read {path}: {e}")
    try:
        return RunManifest(**data)
    except TypeError as e:
        raise ManifestError(f"{path}: malformed manifest: {e}")
