import json
import logging
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.main import EXIT_CONFIG, EXIT_OK, main
from src.utils.config import WORKERS_ENV, Config, ConfigError
from src.utils.logger import JsonLinesFormatter
from src.utils.manifest import MANIFEST_FILE, ManifestError, load_manifest, write_manifest
from src.utils.seeding import SeedStreams

REPO_ROOT = Path(__file__).resolve().parent


def _write(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


class TestConfig:
    def test_defaults(self):
        config = Config()
        assert config.get("controller.N_sim") == 32
        assert config.controller_config().horizon == 7
        assert config.regime == "mixed"
        assert config.predictor_kind == "oracle"
        assert config.unknown_keys == []

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert Config(str(path)) == Config()

    def test_bundled_file_matches_defaults(self):
        assert Config(str(REPO_ROOT / "config" / "default.yaml")) == Config()

    def test_steering_bounds_message(self, tmp_path):
        path = _write(tmp_path / "bad.yaml", {"controller": {"delta_min": 0.5}})
        with pytest.raises(ConfigError) as info:
            Config(path)
        assert any("controller.delta_min" in e and "controller.delta_max" in e for e in info.value.errors)

    def test_all_errors_reported(self):
        with pytest.raises(ConfigError) as info:
            Config(overrides={"controller": {"N_sim": 0, "lambda_a": -1.0},
                              "drivers": {"eta_c": [0.5, 1.5]},
                              "predictor": {"kind": "lstm"},
                              "scenario": {"regime": "polite", "target_lane": 3}})
        keys = [e.split(":")[0] for e in info.value.errors]
        for key in ("controller.N_sim", "controller.lambda_a", "drivers.eta_c",
                    "predictor.kind", "scenario.regime", "scenario.origin_lane/scenario.target_lane"):
            assert key in keys

    def test_unknown_key_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.utils.config"):
            config = Config(overrides={"controller": {"horizon_steps": 9}, "extra": 1})
        assert config.unknown_keys == ["controller.horizon_steps", "extra"]
        assert "controller.horizon_steps" in caplog.text
        assert config.controller_config() == Config().controller_config()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="file not found"):
            Config(str(tmp_path / "nope.yaml"))

    def test_parse_error(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("controller: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="parse error"):
            Config(str(path))

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            Config(str(path))

    def test_get_and_set(self):
        config = Config()
        assert config.get("predictor.missing", "fallback") == "fallback"
        config.set("scenario.seed", 42)
        assert config.seed == 42
        config.set("logging.log_level", "debug")
        assert config.log_level == "DEBUG"

    def test_workers_environment(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "2")
        assert Config().workers == 2
        assert Config().controller_config().workers == 2
        monkeypatch.setenv(WORKERS_ENV, "many")
        assert Config().workers == 4

    def test_save_round_trip(self, tmp_path):
        config = Config(overrides={"scenario": {"seed": 5, "regime": "agg"}, "controller": {"N_sim": 12}})
        path = str(tmp_path / "saved.yaml")
        config.save_to_file(path)
        assert Config(path) == config

    def test_typed_views(self):
        config = Config(overrides={"drivers": {"eta_p": [-0.2, 0.2], "perception_axis": "lateral"},
                                   "scenario": {"time_limit": 20.0}})
        assert config.driver_ranges().eta_p == (-0.2, 0.2)
        assert config.driver_settings().zones.perception_axis.value == "lateral"
        assert config.scenario_settings().time_limit == 20.0
        assert config.predictor_settings().T_obs == 8


class TestManifest:
    def test_round_trip(self, tmp_path):
        config = Config(overrides={"scenario": {"seed": 9}})
        written = write_manifest(config, 9, tmp_path, command="run", predictor="cv", regime="coop")
        loaded = load_manifest(tmp_path)
        assert loaded == written
        assert (loaded.seed, loaded.predictor, loaded.regime, loaded.command) == (9, "cv", "coop", "run")
        assert loaded.to_config() == config

    def test_defaults_come_from_config(self, tmp_path):
        manifest = write_manifest(Config(overrides={"scenario": {"regime": "agg"}}), 0, tmp_path)
        assert (manifest.predictor, manifest.regime) == ("oracle", "agg")

    def test_refuses_existing_manifest(self, tmp_path):
        write_manifest(Config(), 0, tmp_path)
        with pytest.raises(ManifestError):
            write_manifest(Config(), 1, tmp_path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ManifestError):
            load_manifest(tmp_path)


class TestCli:
    def test_check_defaults(self, capsys, restore_logging):
        assert main(["check"]) == EXIT_OK
        assert "OK" in capsys.readouterr().out

    def test_check_invalid_file(self, tmp_path, capsys, restore_logging):
        path = _write(tmp_path / "bad.yaml", {"controller": {"a_min": 5.0}})
        assert main(["check", "--config", path]) == EXIT_CONFIG
        assert "controller.a_min" in capsys.readouterr().err

    def test_short_run(self, tmp_path, restore_logging):
        path = _write(tmp_path / "short.yaml", {
            "controller": {"N_sim": 4, "workers": 1},
            "predictor": {"kind": "cv"},
            "scenario": {"time_limit": 1.2},
            "logging": {"log_level": "WARNING"},
        })
        out = tmp_path / "run"
        assert main(["run", "--config", path, "--seed", "3", "--out", str(out)]) == EXIT_OK
        for name in (MANIFEST_FILE, "trajectory.csv", "controls.csv"):
            assert (out / name).exists()
        assert load_manifest(out).seed == 3

    def test_rerun_into_same_directory_fails(self, tmp_path, restore_logging):
        write_manifest(Config(), 0, tmp_path)
        assert main(["run", "--out", str(tmp_path), "--log-level", "ERROR"]) == 2


class TestLogging:
    def test_json_lines(self):
        record = logging.LogRecord("src.test", logging.INFO, __file__, 1, "solve %s", (3,), None)
        record.event = "solve_step"
        record.fields = {"cost": 1.5, "fallback": False}
        entry = json.loads(JsonLinesFormatter().format(record))
        assert entry["event"] == "solve_step"
        assert entry["message"] == "solve 3"
        assert entry["level"] == "INFO"
        assert (entry["cost"], entry["fallback"]) == (1.5, False)

    def test_plain_record(self):
        record = logging.LogRecord("src.test", logging.WARNING, __file__, 1, "plain", (), None)
        entry = json.loads(JsonLinesFormatter().format(record))
        assert entry["event"] == "log"


class TestSeedStreams:
    def test_equal_arguments_equal_streams(self):
        a = SeedStreams(4).generator("drivers", 7).uniform(size=5)
        b = SeedStreams(4).generator("drivers", 7).uniform(size=5)
        np.testing.assert_array_equal(a, b)

    def test_streams_are_independent(self):
        streams = SeedStreams(4)
        assert streams.generator("drivers", 7).uniform() != streams.generator("drivers", 8).uniform()
        assert streams.generator("noise").uniform() != streams.generator("controller").uniform()

    def test_unknown_stream(self):
        with pytest.raises(KeyError):
            SeedStreams(0).generator("weather")
