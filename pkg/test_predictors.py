import io
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.agents.driver import DriverSettings
from src.environment.dynamics import BodyGeometry, ControlInput, VehicleState, propagate
from src.environment.snapshot import TrafficSnapshot, VehicleRole, VehicleView
from src.predictors import cv_server
from src.predictors.base import (ObservationWindow, PredictionSheet, PredictorTimeoutError, ShapeMismatchError,
                                 WindowNotReadyError)
from src.predictors.constant_velocity import ConstantVelocityPredictor
from src.predictors.export import (COLUMNS, count_windows, export_training_batch, read_training_batch,
                                   sliding_windows)
from src.predictors.external import ExternalPredictor
from src.predictors.ground_truth import GroundTruthPredictor
from src.predictors.history import HistoryBuffer
from src.predictors.metrics import ade_fde
from src.predictors.registry import PredictorSettings, make_predictor

REPO_ROOT = Path(__file__).resolve().parent

SLOW_SERVER = (
    "import json, sys, time\n"
    "for line in sys.stdin:\n"
    "    if json.loads(line).get('ping'):\n"
    "        print(json.dumps({'pong': True}), flush=True)\n"
    "    else:\n"
    "        time.sleep(5)\n"
)


def _snapshot(tick, states, roles=None):
    roles = roles or {}
    views = tuple(VehicleView(vid, roles.get(vid, VehicleRole.DRIVER), state, BodyGeometry(), 1, 1)
                  for vid, state in states.items())
    return TrafficSnapshot(tick, tick * 0.4, views)


def _moving_window(t_obs=8):
    """Vehicle 0 moves (1, 0.5) per step, vehicle 1 stands still."""
    steps = np.arange(t_obs, dtype=float)
    moving = np.stack([steps, 0.5 * steps], axis=-1)
    still = np.tile([10.0, 3.7], (t_obs, 1))
    return ObservationWindow((0, 1), np.stack([moving, still]), np.zeros(2), ego_index=None)


class TestHistoryBuffer:
    def test_back_fill(self):
        history = HistoryBuffer(t_obs=8)
        history.record(_snapshot(0, {0: VehicleState(1.0, 2.0, 0.0, 0.0)}))
        window = history.window()
        assert window.positions.shape == (1, 8, 2)
        np.testing.assert_array_equal(window.positions[0], np.tile([1.0, 2.0], (8, 1)))
        assert history.depth(0) == 1

    def test_rolling_and_pruning(self):
        history = HistoryBuffer(t_obs=3)
        for tick in range(5):
            states = {0: VehicleState(float(tick), 0.0, 0.0, 1.0)}
            if tick < 4:
                states[1] = VehicleState(-5.0, 3.7, 0.0, 0.0)
            if tick == 4:
                states[2] = VehicleState(20.0, 3.7, 0.0, 0.0)
            history.record(_snapshot(tick, states, {0: VehicleRole.EGO}))
        window = history.window()
        assert window.vehicle_ids == (0, 2)
        assert window.ego_index == 0
        np.testing.assert_array_equal(window.positions[0, :, 0], [2.0, 3.0, 4.0])
        np.testing.assert_array_equal(window.positions[1, :, 0], [20.0, 20.0, 20.0])
        assert history.depth(1) == 0

    def test_empty(self):
        with pytest.raises(RuntimeError):
            HistoryBuffer().window()


class TestConstantVelocity:
    def test_extrapolates_last_displacement(self):
        sheet = ConstantVelocityPredictor(8, 2).predict(_moving_window())
        np.testing.assert_allclose(sheet.positions[0], [[8.0, 4.0], [9.0, 4.5]])

    def test_stationary(self):
        sheet = ConstantVelocityPredictor(8, 2).predict(_moving_window())
        np.testing.assert_array_equal(sheet.positions[1], [[10.0, 3.7], [10.0, 3.7]])

    def test_constant_displacement(self):
        sheet = ConstantVelocityPredictor(8, 7).predict(_moving_window())
        steps = np.diff(sheet.positions, axis=1)
        np.testing.assert_allclose(steps, np.broadcast_to(steps[:, :1], steps.shape))

    def test_window_not_ready(self):
        with pytest.raises(WindowNotReadyError):
            ConstantVelocityPredictor(8, 2).predict(_moving_window(t_obs=4))

    def test_plan_longer_than_t_pred(self):
        with pytest.raises(ValueError):
            ConstantVelocityPredictor(8, 2).predict(_moving_window(), ego_plan=np.zeros((3, 2)))

    def test_rollout_inserts_ego_plan(self, geom):
        window = ObservationWindow((0, 1), _moving_window().positions, np.zeros(2), ego_index=0)
        states = propagate(VehicleState(7.0, 3.5, 0.0, 2.0), [ControlInput(1.0, 0.1)] * 7, geom, 0.4)
        sheet = ConstantVelocityPredictor(8, 2).rollout(window, states, 7)
        assert sheet.positions.shape == (2, 7, 2)
        np.testing.assert_array_equal(sheet.positions[0], [[s.x, s.y] for s in states[1:]])
        np.testing.assert_array_equal(sheet.positions[1], np.tile([10.0, 3.7], (7, 1)))

    def test_advance_shape_check(self):
        with pytest.raises(ShapeMismatchError):
            _moving_window().advance(np.zeros((3, 1, 2)))


def _merge_world(make_world, geom, regime="coop", settings=None):
    world = make_world(regime=regime, seed=3, settings=settings)
    for x in (20.0, 12.0, 4.0, -4.0):
        world.add_vehicle(VehicleRole.DRIVER, VehicleState(x, 3.7, 0.0, 2.0), geom)
    world.add_vehicle(VehicleRole.EGO, VehicleState(5.0, 0.0, 0.0, 2.0), geom, intent_lane=2)
    return world


class TestGroundTruth:
    def test_matches_the_simulation(self, make_world, geom):
        world = _merge_world(make_world, geom, settings=DriverSettings())
        history = HistoryBuffer(8)
        history.record(world.snapshot())
        oracle = GroundTruthPredictor(8, 2)
        oracle.observe(world)
        window = history.window()
        states = propagate(world.ego.state, [ControlInput(0.5, 0.05)] * 7, geom, 0.4)

        sheet = oracle.rollout(window, states, 7)

        actual = np.empty_like(sheet.positions)
        for k in range(7):
            world.step(ego_state=states[k + 1])
            for row, vehicle_id in enumerate(window.vehicle_ids):
                vehicle = world.get_vehicle(vehicle_id)
                actual[row, k] = (vehicle.state.x, vehicle.state.y)
        np.testing.assert_allclose(sheet.positions, actual, rtol=0.0, atol=1e-12)

    def test_reacts_to_the_ego_plan(self, make_world, geom):
        world = _merge_world(make_world, geom, regime="agg")
        history = HistoryBuffer(8)
        history.record(world.snapshot())
        oracle = GroundTruthPredictor(8, 2)
        oracle.observe(world)
        window = history.window()

        stay = [world.ego.state] + [VehicleState(5.0, 0.0, 0.0, 0.0)] * 3
        cut_in = [world.ego.state] + [VehicleState(5.0, 2.6, 0.3, 0.0)] * 3
        assert not np.allclose(oracle.rollout(window, stay, 3).positions,
                               oracle.rollout(window, cut_in, 3).positions)

    def test_predict_shape(self, make_world, geom):
        world = _merge_world(make_world, geom)
        history = HistoryBuffer(8)
        history.record(world.snapshot())
        oracle = GroundTruthPredictor(8, 2)
        oracle.observe(world)
        sheet = oracle.predict(history.window(), ego_plan=np.array([[5.8, 0.0], [6.6, 0.1]]))
        assert sheet.positions.shape == (5, 2, 2)
        assert not np.isnan(sheet.positions).any()

    def test_requires_observation(self):
        with pytest.raises(WindowNotReadyError):
            GroundTruthPredictor(8, 2).predict(_moving_window())


class TestExternal:
    def test_matches_constant_velocity(self, monkeypatch):
        monkeypatch.chdir(REPO_ROOT)
        predictor = ExternalPredictor(8, 2, deadline=5.0, pool_size=1)
        try:
            sheet = predictor.predict(_moving_window())
        finally:
            predictor.close()
        expected = ConstantVelocityPredictor(8, 2).predict(_moving_window())
        np.testing.assert_allclose(sheet.positions, expected.positions)

    def test_deadline(self):
        predictor = ExternalPredictor(8, 2, command=[sys.executable, "-c", SLOW_SERVER], deadline=0.05, pool_size=1)
        try:
            with pytest.raises(PredictorTimeoutError):
                predictor.predict(_moving_window())
        finally:
            predictor.close()

    def test_timed_out_server_is_replaced(self):
        predictor = ExternalPredictor(8, 2, command=[sys.executable, "-c", SLOW_SERVER], deadline=0.05, pool_size=1)
        try:
            first = predictor._all[0]
            for _ in range(2):
                with pytest.raises(PredictorTimeoutError):
                    predictor.predict(_moving_window())
            assert len(predictor._all) == 1
            assert first not in predictor._all
            assert not first.alive
            assert predictor._all[0].alive
        finally:
            predictor.close()

    def test_server_handle(self):
        assert cv_server.handle({"ping": True}) == {"pong": True}
        reply = cv_server.handle({"t_obs": 8, "t_pred": 2, "vehicles": _moving_window().positions.tolist()})
        np.testing.assert_allclose(reply["pred"][0], [[8.0, 4.0], [9.0, 4.5]])

    def test_server_reports_bad_requests(self):
        out = io.StringIO()
        cv_server.serve(io.StringIO("not json\n\n{\"ping\": true}\n"), out)
        replies = [json.loads(line) for line in out.getvalue().splitlines()]
        assert "error" in replies[0]
        assert replies[1] == {"pong": True}


class TestAdeFde:
    def test_exact(self):
        positions = np.random.default_rng(0).normal(size=(3, 2, 2))
        assert ade_fde(positions, positions.copy()) == (0.0, 0.0)

    def test_uniform_offset(self):
        truth = np.zeros((4, 2, 2))
        predicted = truth + np.array([0.6, 0.8])
        assert ade_fde(PredictionSheet((0, 1, 2, 3), predicted), truth) == pytest.approx((1.0, 1.0))

    def test_mixed_offsets(self):
        predicted = np.zeros((2, 2, 2))
        truth = np.array([[[3.0, 4.0], [0.0, 1.0]], [[0.0, 0.0], [6.0, 8.0]]])
        assert ade_fde(predicted, truth) == pytest.approx((4.0, 5.5))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ade_fde(np.zeros((2, 2, 2)), np.zeros((2, 3, 2)))


def _trajectory(n_steps, n_vehicles=3, seed=0):
    rng = np.random.default_rng(seed)
    rows = [{"t": step * 0.4, "step": step, "vehicle_id": vid, "role": "driver",
             "x": float(rng.uniform(0, 50)), "y": float(rng.uniform(0, 7.4)), "psi": 0.0, "v": 1.0}
            for step in range(n_steps) for vid in range(n_vehicles)]
    return pd.DataFrame(rows)


class TestExport:
    def test_window_count(self):
        assert count_windows(10, 8, 2) == 1
        assert count_windows(25, 8, 2) == 16
        assert count_windows(5, 8, 2) == 0

    def test_single_window(self):
        frame = sliding_windows(_trajectory(10), 8, 2)
        assert list(frame.columns) == COLUMNS
        assert frame["window_id"].nunique() == 1
        assert frame.groupby("vehicle_id").size().tolist() == [10, 10, 10]
        assert frame["step_index"].tolist()[:10] == list(range(8)) + [0, 1]

    def test_windows_per_episode(self):
        assert sliding_windows(_trajectory(15), 8, 2)["window_id"].nunique() == 6

    def test_partial_vehicles_excluded(self):
        trajectory = _trajectory(12)
        trajectory = trajectory[~((trajectory["vehicle_id"] == 2) & (trajectory["step"] >= 10))]
        frame = sliding_windows(trajectory, 8, 2)
        assert sorted(frame.loc[frame["window_id"] == 0, "vehicle_id"].unique()) == [0, 1, 2]
        assert sorted(frame.loc[frame["window_id"] == 2, "vehicle_id"].unique()) == [0, 1]

    def test_noise_only_on_observations(self):
        trajectory = _trajectory(10)
        clean = sliding_windows(trajectory, 8, 2)
        noisy = sliding_windows(trajectory, 8, 2, noise=0.5, rng=np.random.default_rng(1))
        observed = clean["role"] == "obs"
        assert not np.allclose(clean.loc[observed, "x"], noisy.loc[observed, "x"])
        np.testing.assert_array_equal(clean.loc[~observed, ["x", "y"]], noisy.loc[~observed, ["x", "y"]])

    def test_noise_needs_rng(self):
        with pytest.raises(ValueError):
            sliding_windows(_trajectory(10), 8, 2, noise=0.1)

    def test_targets_are_raw_positions(self):
        trajectory = _trajectory(10)
        frame = sliding_windows(trajectory, 8, 2)
        raw = trajectory[(trajectory["vehicle_id"] == 1) & (trajectory["step"] >= 8)][["x", "y"]].to_numpy()
        target = frame[(frame["vehicle_id"] == 1) & (frame["role"] == "pred")][["x", "y"]].to_numpy()
        np.testing.assert_array_equal(target, raw)

    def test_round_trip(self, tmp_path):
        trajectory = _trajectory(14, seed=3)
        path = tmp_path / "batch" / "training.csv"
        assert export_training_batch(trajectory, path, 8, 2, noise=0.2, rng=np.random.default_rng(2)) == 5

        frame = sliding_windows(trajectory, 8, 2, noise=0.2, rng=np.random.default_rng(2))
        windows = read_training_batch(path)
        assert [w.window_id for w in windows] == list(range(5))
        for window in windows:
            rows = frame[frame["window_id"] == window.window_id]
            for i, vehicle_id in enumerate(window.vehicle_ids):
                track = rows[rows["vehicle_id"] == vehicle_id]
                np.testing.assert_array_equal(window.observed[i], track[track["role"] == "obs"][["x", "y"]])
                np.testing.assert_array_equal(window.target[i], track[track["role"] == "pred"][["x", "y"]])


class TestRegistry:
    def test_kinds(self):
        settings = PredictorSettings(kind="cv")
        assert isinstance(make_predictor(settings), ConstantVelocityPredictor)
        oracle = make_predictor(settings, kind="oracle")
        assert isinstance(oracle, GroundTruthPredictor)
        assert (oracle.t_obs, oracle.t_pred) == (8, 2)

    def test_unknown(self):
        with pytest.raises(ValueError):
            make_predictor(PredictorSettings(kind="sgan"))

    def test_invalid_lengths(self):
        with pytest.raises(ValueError):
            ConstantVelocityPredictor(0, 2)
