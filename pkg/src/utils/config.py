import copy
import logging
import os
from typing import Any, Dict, List, Optional

import yaml

from src.agents.driver import DriverSettings
from src.agents.driver_params import DriverRanges
from src.agents.mobil import MobilSettings
from src.agents.population import Regime
from src.agents.yielding import PerceptionAxis, ZoneSettings
from src.controller.params import ControllerConfig
from src.environment.dynamics import BodyGeometry
from src.harness.scenario import Scenario, ScenarioSettings, build_scenario
from src.predictors.registry import PREDICTOR_TYPES, PredictorSettings

logger = logging.getLogger(__name__)

WORKERS_ENV = "DENSE_MERGE_WORKERS"

RANGE_KEYS = ("v_ref", "T", "a_max", "b", "delta", "s0", "eta_c", "eta_p")
SCENARIO_RANGE_KEYS = ("ego_x", "ego_v", "far_lane_gap")


class ConfigError(ValueError):
    """Invalid configuration; carries every violation found."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _defaults() -> Dict[str, Any]:
    return {
        # Rollout MPC
        'controller': {
            'T': 2.8,
            'N_sim': 32,
            'dt': 0.4,
            'lambda_div': 12000.0,
            'lambda_v': 1000.0,
            'lambda_delta': 500.0,
            'lambda_a': 500.0,
            'lambda_Delta_delta': 100.0,
            'lambda_Delta_a': 100.0,
            'delta_min': -0.3,
            'delta_max': 0.3,
            'a_min': -4.0,
            'a_max': 3.5,
            'x_end': 50.0,
            'v_ref': 10.0,
            'epsilon': 0.1,
            'alpha': 0.1,
            'sampling': 'iid',
            'inject_zero_candidate': False,
            'capture_tolerance_y': 0.2,
            'capture_tolerance_psi': 0.05,
            'mode_lookahead': 1.4,
            'y_min': None,
            'y_max': None,
            'workers': 4,
        },

        # Simulated drivers: sampling ranges [lo, hi] and fixed body dimensions
        'drivers': {
            'v_ref': [2.0, 5.0],
            'T': [1.0, 2.0],
            'a_max': [2.5, 3.5],
            'b': [1.5, 2.5],
            'delta': [3.5, 4.5],
            's0': [1.0, 3.0],
            'eta_c': [0.0, 1.0],
            'eta_p': [-0.15, 0.15],
            'w': 0.9,
            'h': 2.0,
            'l_f': 1.45,
            'l_r': 1.45,

            # MOBIL
            'politeness': 0.5,
            'a_threshold': 0.1,
            'b_safe': 4.0,
            'lane_changes': False,
            'mobil_lanes': [2, 3],
            'mobil_interval': 1.2,

            # Yield zones
            'zone_b_length': 6.0,
            'zone_b_lateral': 3.7,
            'zone_a_intrusion': 0.3,
            'perception_axis': 'longitudinal',

            # Lateral control and noise
            'k_lateral': 0.15,
            'k_heading': 0.8,
            'max_steer': 0.3,
            'lane_capture': 0.2,
            'accel_noise': 0.3,
            'oscillation_amplitude': 0.1,
            'oscillation_period': 4.0,
            'speed_cap': True,
        },

        'predictor': {
            'kind': 'oracle',
            'T_obs': 8,
            'T_pred': 2,
            'command': None,
            'deadline': 0.05,
            'pool_size': 2,
            'startup_timeout': 10.0,
            'export_noise': 0.0,
        },

        'scenario': {
            'regime': 'mixed',
            'seed': 0,
            'episodes': 100,
            'n_lanes': 3,
            'lane_width': 3.7,
            'origin_lane': 1,
            'target_lane': 2,
            'time_limit': 40.0,
            'ego_x': [5.0, 15.0],
            'ego_v': [0.0, 3.0],
            'stopped_gap': 0.5,
            'lane_start': -20.0,
            'wrap_margin': 40.0,
            'target_gap_max': 3.9,
            'far_lane_traffic': True,
            'far_lane_gap': [6.0, 16.0],
            'placement_retries': 20,
            'merge_hold_steps': 2,
            'noise': True,
        },

        'logging': {
            'log_level': 'INFO',
            'log_file': None,
            'log_steps': True,
        },
    }


def _merge(base: Dict[str, Any], override: Dict[str, Any], path: str, unknown: List[str]):
    for key, value in override.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in base:
            unknown.append(where)
            base[key] = value
        elif isinstance(base[key], dict) and isinstance(value, dict):
            _merge(base[key], value, where, unknown)
        else:
            base[key] = value


class Config:
    """
    Configuration of the merge simulation.

    Defaults live in code; a YAML file is deep-merged on top. Values are
    validated as a whole and every violation is reported at once.
    """

    def __init__(self, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to a YAML configuration file, if any
            overrides: Nested values applied after the file

        Raises:
            ConfigError: on unreadable files or invalid values
        """
        self._config = _defaults()
        self.unknown_keys: List[str] = []

        if config_path:
            self._load_from_file(config_path)
        if overrides:
            self.update(overrides)

        errors = self.validate()
        if errors:
            raise ConfigError(errors)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        return cls(overrides=data)

    def _load_from_file(self, config_path: str):
        """
        Load configuration from a YAML file.

        Args:
            config_path: Path to configuration file
        """
        if not os.path.exists(config_path):
            raise ConfigError([f"{config_path}: file not found"])
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                file_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError([f"{config_path}: parse error: {e}"])
        if not isinstance(file_config, dict):
            raise ConfigError([f"{config_path}: top level must be a mapping"])

        self.update(file_config)
        logger.info("loaded configuration", extra={"event": "config", "fields": {"path": config_path}})

    def save_to_file(self, config_path: str):
        """
        Save current configuration to a YAML file.

        Args:
            config_path: Path to save configuration to
        """
        with open(config_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(self._config, f, default_flow_style=False, sort_keys=False)

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Dotted key, e.g. "controller.N_sim"
            default: Default value if key doesn't exist

        Returns:
            Configuration value
        """
        node: Any = self._config
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    def set(self, key: str, value: Any):
        """
        Set a configuration value.

        Args:
            key: Dotted key
            value: Value to set
        """
        parts = key.split('.')
        node = self._config
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def update(self, config_dict: Dict[str, Any]):
        """
        Deep-merge nested values into the configuration.

        Args:
            config_dict: Dictionary of configuration values to update
        """
        unknown: List[str] = []
        _merge(self._config, copy.deepcopy(config_dict), "", unknown)
        for key in unknown:
            logger.warning("unknown configuration key '%s' ignored", key,
                           extra={"event": "config_unknown_key", "fields": {"key": key}})
        self.unknown_keys.extend(unknown)

    def validate(self) -> List[str]:
        """
        Check every invariant of the configuration.

        Returns:
            One field-precise message per violation
        """
        errors: List[str] = []
        try:
            errors += self.controller_config(apply_env=False).validate()
        except (TypeError, ValueError) as e:
            errors.append(f"controller: {e}")

        drivers = self._config['drivers']
        for key in RANGE_KEYS:
            errors += self._check_range(f"drivers.{key}", drivers.get(key))
        eta_c = drivers.get('eta_c')
        if isinstance(eta_c, (list, tuple)) and len(eta_c) == 2 and (min(eta_c) < 0 or max(eta_c) > 1):
            errors.append(f"drivers.eta_c: must lie within [0, 1], got {list(eta_c)}")
        for key in ('w', 'h', 'l_f', 'l_r'):
            if not self._positive(drivers.get(key)):
                errors.append(f"drivers.{key}: must be > 0, got {drivers.get(key)}")
        if self._positive(drivers.get('w')) and self._positive(drivers.get('h')) and drivers['h'] <= drivers['w']:
            errors.append(f"drivers.h/drivers.w: h ({drivers['h']}) must exceed w ({drivers['w']})")
        try:
            PerceptionAxis(drivers.get('perception_axis'))
        except ValueError:
            errors.append(f"drivers.perception_axis: expected one of "
                          f"{[a.value for a in PerceptionAxis]}, got '{drivers.get('perception_axis')}'")

        predictor = self._config['predictor']
        if predictor.get('kind') not in PREDICTOR_TYPES:
            errors.append(f"predictor.kind: expected one of {sorted(PREDICTOR_TYPES)}, got '{predictor.get('kind')}'")
        for key in ('T_obs', 'T_pred', 'pool_size'):
            if not isinstance(predictor.get(key), int) or predictor[key] < 1:
                errors.append(f"predictor.{key}: must be an integer >= 1, got {predictor.get(key)}")
        if not self._positive(predictor.get('deadline')):
            errors.append(f"predictor.deadline: must be > 0, got {predictor.get('deadline')}")

        scenario = self._config['scenario']
        try:
            Regime.parse(scenario.get('regime'))
        except ValueError:
            errors.append(f"scenario.regime: expected one of {[r.value for r in Regime]}, "
                          f"got '{scenario.get('regime')}'")
        for key in SCENARIO_RANGE_KEYS:
            errors += self._check_range(f"scenario.{key}", scenario.get(key))
        for key in ('lane_width', 'time_limit', 'target_gap_max'):
            if not self._positive(scenario.get(key)):
                errors.append(f"scenario.{key}: must be > 0, got {scenario.get(key)}")
        n_lanes = scenario.get('n_lanes')
        if not isinstance(n_lanes, int) or n_lanes < 2:
            errors.append(f"scenario.n_lanes: must be an integer >= 2, got {n_lanes}")
        else:
            lanes_ok = True
            for key in ('origin_lane', 'target_lane'):
                if not isinstance(scenario.get(key), int) or not 1 <= scenario[key] <= n_lanes:
                    errors.append(f"scenario.{key}: must be a lane in 1..{n_lanes}, got {scenario.get(key)}")
                    lanes_ok = False
            if lanes_ok and abs(scenario['origin_lane'] - scenario['target_lane']) != 1:
                errors.append("scenario.origin_lane/scenario.target_lane: lanes must be adjacent")
        if not isinstance(scenario.get('episodes'), int) or scenario['episodes'] < 1:
            errors.append(f"scenario.episodes: must be an integer >= 1, got {scenario.get('episodes')}")
        if not isinstance(scenario.get('merge_hold_steps'), int) or scenario['merge_hold_steps'] < 1:
            errors.append(f"scenario.merge_hold_steps: must be an integer >= 1, got {scenario.get('merge_hold_steps')}")

        level = self._config['logging'].get('log_level')
        if str(level).upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"logging.log_level: unknown level '{level}'")
        return errors

    @staticmethod
    def _positive(value: Any) -> bool:
        return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0

    @staticmethod
    def _check_range(key: str, value: Any) -> List[str]:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            return [f"{key}: expected [lo, hi], got {value}"]
        lo, hi = value
        if not all(isinstance(v, (int, float)) for v in value):
            return [f"{key}: bounds must be numbers, got {list(value)}"]
        if lo > hi:
            return [f"{key}: lo ({lo}) exceeds hi ({hi})"]
        return []

    # Typed views
    def controller_config(self, apply_env: bool = True) -> ControllerConfig:
        values = dict(self._config['controller'])
        values = {k: v for k, v in values.items() if k in ControllerConfig.__dataclass_fields__}
        if apply_env:
            values['workers'] = self.workers
        return ControllerConfig(**values)

    def body_geometry(self) -> BodyGeometry:
        d = self._config['drivers']
        return BodyGeometry(l_f=float(d['l_f']), l_r=float(d['l_r']), w=float(d['w']), h=float(d['h']))

    def driver_ranges(self) -> DriverRanges:
        d = self._config['drivers']
        return DriverRanges(**{key: tuple(float(v) for v in d[key]) for key in RANGE_KEYS})

    def driver_settings(self) -> DriverSettings:
        d = self._config['drivers']
        return DriverSettings(
            zones=ZoneSettings(zone_b_length=d['zone_b_length'], zone_b_lateral=d['zone_b_lateral'],
                               zone_a_intrusion=d['zone_a_intrusion'],
                               perception_axis=PerceptionAxis(d['perception_axis'])),
            mobil=MobilSettings(politeness=d['politeness'], a_threshold=d['a_threshold'], b_safe=d['b_safe']),
            lane_changes=bool(d['lane_changes']),
            mobil_lanes=tuple(d['mobil_lanes']),
            mobil_interval=d['mobil_interval'],
            k_lateral=d['k_lateral'],
            k_heading=d['k_heading'],
            max_steer=d['max_steer'],
            lane_capture=d['lane_capture'],
            accel_noise=d['accel_noise'],
            oscillation_amplitude=d['oscillation_amplitude'],
            oscillation_period=d['oscillation_period'],
            speed_cap=bool(d['speed_cap']),
        )

    def scenario_settings(self) -> ScenarioSettings:
        s = self._config['scenario']
        values = {k: (tuple(v) if k in SCENARIO_RANGE_KEYS else v)
                  for k, v in s.items() if k in ScenarioSettings.__dataclass_fields__}
        return ScenarioSettings(**values)

    def predictor_settings(self) -> PredictorSettings:
        p = self._config['predictor']
        command = tuple(p['command']) if p.get('command') else None
        return PredictorSettings(kind=p['kind'], T_obs=p['T_obs'], T_pred=p['T_pred'], command=command,
                                 deadline=p['deadline'], pool_size=p['pool_size'],
                                 startup_timeout=p['startup_timeout'])

    def build_scenario(self, regime: Optional[str] = None, seed: Optional[int] = None) -> Scenario:
        """Scenario for a regime and seed (defaults from the scenario section)."""
        controller = self._config['controller']
        return build_scenario(
            regime or self.regime, self.seed if seed is None else seed,
            settings=self.scenario_settings(), ranges=self.driver_ranges(),
            geom=self.body_geometry(), driver_settings=self.driver_settings(),
            x_end=controller['x_end'], epsilon=controller['epsilon'])

    # Properties for common configuration values
    @property
    def seed(self) -> int:
        return int(self._config['scenario']['seed'])

    @property
    def regime(self) -> str:
        return Regime.parse(self._config['scenario']['regime']).value

    @property
    def episodes(self) -> int:
        return int(self._config['scenario']['episodes'])

    @property
    def predictor_kind(self) -> str:
        return self._config['predictor']['kind']

    @property
    def workers(self) -> int:
        """Worker count; the DENSE_MERGE_WORKERS environment variable wins over the file."""
        override = os.environ.get(WORKERS_ENV)
        if override:
            try:
                return max(1, int(override))
            except ValueError:
                logger.warning("ignoring non-integer %s=%r", WORKERS_ENV, override)
        return int(self._config['controller']['workers'])

    @property
    def log_level(self) -> str:
        return str(self._config['logging']['log_level']).upper()

    @property
    def log_file(self) -> Optional[str]:
        return self._config['logging']['log_file']

    def to_dict(self) -> Dict[str, Any]:
        """
        Get the entire configuration as a dictionary.

        Returns:
            Deep copy of the configuration
        """
        return copy.deepcopy(self._config)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Config) and self._config == other._config

    def __repr__(self) -> str:
        return f"Config(regime={self.regime}, seed={self.seed}, predictor={self.predictor_kind})"
