import math
from dataclasses import replace

import numpy as np
import pytest

from src.agents.driver import Driver, DriverSettings
from src.agents.driver_params import DriverRanges, midpoint_driver, sample_driver
from src.agents.idm import FREE_ROAD_GAP, equilibrium_speed, idm_acceleration
from src.agents.memory import Memory
from src.agents.mobil import LaneChange, LaneNeighbors, Neighbor, acceleration_behind, mobil_lane_change
from src.agents.population import Regime
from src.agents.yielding import PerceptionAxis, YieldZone, ZoneSettings, classify_zone, yield_decision
from src.environment.dynamics import VehicleState
from src.environment.road import Road
from src.environment.snapshot import TrafficSnapshot, VehicleRole, VehicleView
from src.utils.seeding import SeedStreams

LANE_2 = 3.7


@pytest.fixture
def params():
    return midpoint_driver()


class TestSampling:
    def test_degenerate_range(self):
        assert sample_driver(0, DriverRanges(v_ref=(4.0, 4.0))).v_ref == 4.0

    def test_within_ranges(self):
        ranges = DriverRanges()
        rng = np.random.default_rng(10)
        for _ in range(500):
            params = sample_driver(rng, ranges)
            values = {"v_ref": params.v_ref, "T": params.T_headway, "a_max": params.a_max, "b": params.b_comf,
                      "delta": params.delta_exp, "s0": params.s0, "eta_c": params.eta_c, "eta_p": params.eta_p}
            for name, (lo, hi) in ranges.items().items():
                assert lo <= values[name] <= hi
            assert (params.geom.w, params.geom.h) == (0.9, 2.0)

    def test_replay(self):
        assert sample_driver(42) == sample_driver(42)
        assert sample_driver(42) != sample_driver(43)


class TestIdm:
    def test_free_road_equilibrium(self, params):
        assert idm_acceleration(params.v_ref, FREE_ROAD_GAP, 0.0, params) == pytest.approx(0.0, abs=1e-6)

    def test_standstill_free_road(self, params):
        assert idm_acceleration(0.0, FREE_ROAD_GAP, 0.0, params) == pytest.approx(params.a_max, rel=1e-6)

    def test_formula(self, params):
        v, gap, dv = 3.0, 5.0, 1.0
        s_star = params.s0 + v * params.T_headway + v * dv / (2 * math.sqrt(params.a_max * params.b_comf))
        raw = params.a_max * (1 - (v / params.v_ref) ** params.delta_exp - (s_star / gap) ** 2)
        expected = min(max(raw, -2 * params.b_comf), params.a_max)
        assert idm_acceleration(v, gap, dv, params) == pytest.approx(expected)

    def test_hard_braking_clamp(self, params):
        assert idm_acceleration(5.0, 0.2, 5.0, params) == -2 * params.b_comf

    @pytest.mark.parametrize("gap", [2.5, 3.9, 8.0, 20.0])
    def test_equilibrium_speed_holds_the_gap(self, params, gap):
        v = equilibrium_speed(gap, params)
        assert 0.0 < v < params.v_ref
        assert idm_acceleration(v, gap, 0.0, params) == pytest.approx(0.0, abs=1e-4)

    def test_equilibrium_speed_limits(self, params):
        assert equilibrium_speed(params.s0, params) == 0.0
        assert equilibrium_speed(FREE_ROAD_GAP, params) == pytest.approx(params.v_ref, rel=1e-3)
        assert equilibrium_speed(3.0, params) < equilibrium_speed(3.5, params)


class TestMobil:
    def _blocked(self):
        return LaneNeighbors(leader=Neighbor(VehicleState(6.0, 0.0, 0.0, 0.0), midpoint_driver().geom))

    def test_empty_target_lane(self, params):
        me = VehicleState(0.0, 0.0, 0.0, 3.0)
        decision = mobil_lane_change(me, params, self._blocked(), {LaneChange.CHANGE_LEFT: LaneNeighbors()})
        assert decision == LaneChange.CHANGE_LEFT

    def test_unsafe_for_new_follower(self, params):
        me = VehicleState(0.0, 0.0, 0.0, 3.0)
        follower = Neighbor(VehicleState(-4.5, LANE_2, 0.0, 5.0), params.geom, replace(params, b_comf=2.5))
        decision = mobil_lane_change(me, params, self._blocked(),
                                     {LaneChange.CHANGE_LEFT: LaneNeighbors(follower=follower)})
        assert decision == LaneChange.STAY

    def test_identical_lanes(self, params):
        me = VehicleState(0.0, 0.0, 0.0, 3.0)
        leader = Neighbor(VehicleState(20.0, 0.0, 0.0, 3.0), params.geom)
        lane = LaneNeighbors(leader=leader)
        assert mobil_lane_change(me, params, lane, {LaneChange.CHANGE_LEFT: lane}) == LaneChange.STAY

    def test_accepted_changes_are_safe(self):
        rng = np.random.default_rng(11)
        settings_b_safe = 4.0
        for _ in range(2000):
            me_params = sample_driver(rng)
            me = VehicleState(0.0, 0.0, 0.0, float(rng.uniform(0, 5)))

            def neighbor(lo, hi, y):
                if rng.random() < 0.3:
                    return None
                return Neighbor(VehicleState(float(rng.uniform(lo, hi)), y, 0.0, float(rng.uniform(0, 5))),
                                me_params.geom, sample_driver(rng))

            current = LaneNeighbors(leader=neighbor(4.5, 30, 0.0), follower=neighbor(-30, -4.5, 0.0))
            target = LaneNeighbors(leader=neighbor(4.5, 30, LANE_2), follower=neighbor(-30, -4.5, LANE_2))
            decision = mobil_lane_change(me, me_params, current, {LaneChange.CHANGE_LEFT: target})
            if decision == LaneChange.CHANGE_LEFT and target.follower is not None:
                induced = acceleration_behind(target.follower.state, target.follower.geom, target.follower.params,
                                              Neighbor(me, me_params.geom, me_params))
                assert induced >= -settings_b_safe


class TestYielding:
    driver_state = VehicleState(0.0, LANE_2, 0.0, 3.0)

    def _decide(self, params, intruder, rng=None, **kwargs):
        return yield_decision(self.driver_state, params, 2, intruder, params.geom, Road(),
                              rng or np.random.default_rng(0), **kwargs)

    def test_zone_b_cooperative(self, params):
        decision = self._decide(params.with_cooperativeness(1.0), VehicleState(5.0, 0.0, 0.0, 1.0))
        assert decision.zone == YieldZone.B_SELECTIVE
        assert decision.yielding

    def test_zone_b_aggressive(self, params):
        decision = self._decide(params.with_cooperativeness(0.0), VehicleState(5.0, 0.0, 0.0, 1.0))
        assert decision.zone == YieldZone.B_SELECTIVE
        assert not decision.yielding

    @pytest.mark.parametrize("eta_c", [0.0, 0.5, 1.0])
    def test_zone_a_always_yields(self, params, eta_c):
        decision = self._decide(params.with_cooperativeness(eta_c), VehicleState(5.0, 2.2, 0.2, 1.0))
        assert decision.zone == YieldZone.A_FORCED
        assert decision.yielding

    def test_outside_zones(self, params):
        decision = self._decide(params, VehicleState(30.0, 0.0, 0.0, 1.0))
        assert decision.zone == YieldZone.NONE
        assert not decision.yielding

    def test_perception_perturbation_shifts_zone_b(self, params):
        # intruder rear bumper 6.1 m ahead of the front bumper
        intruder = VehicleState(10.1, 0.0, 0.0, 1.0)
        assert classify_zone(self.driver_state, replace(params, eta_p=0.15), 2, intruder,
                             params.geom, Road()) == YieldZone.B_SELECTIVE
        assert classify_zone(self.driver_state, replace(params, eta_p=-0.15), 2, intruder,
                             params.geom, Road()) == YieldZone.NONE

    def test_perception_perturbation_on_lateral_axis(self, params):
        # intruder centred in the next lane: near edge 0.95 m from the lane line
        intruder = VehicleState(5.0, 0.0, 0.0, 1.0)
        lateral = ZoneSettings(zone_b_lateral=0.9, perception_axis=PerceptionAxis.LATERAL)
        assert classify_zone(self.driver_state, replace(params, eta_p=0.15), 2, intruder,
                             params.geom, Road(), lateral) == YieldZone.B_SELECTIVE
        assert classify_zone(self.driver_state, replace(params, eta_p=-0.15), 2, intruder,
                             params.geom, Road(), lateral) == YieldZone.NONE

        longitudinal = replace(lateral, perception_axis=PerceptionAxis.LONGITUDINAL)
        assert classify_zone(self.driver_state, replace(params, eta_p=0.15), 2, intruder,
                             params.geom, Road(), longitudinal) == YieldZone.NONE

    def test_decision_held_for_the_episode(self, params):
        memory = Memory()
        rng = np.random.default_rng(12)
        half = params.with_cooperativeness(0.5)
        intruder = VehicleState(5.0, 0.0, 0.0, 1.0)
        first = self._decide(half, intruder, rng, memory=memory, intruder_id=7)
        for tick in range(1, 50):
            assert self._decide(half, intruder, rng, memory=memory, intruder_id=7, tick=tick) == first
        self._decide(half, VehicleState(40.0, 0.0, 0.0, 1.0), rng, memory=memory, intruder_id=7)
        assert memory.recall(7) is None

    @pytest.mark.slow
    @pytest.mark.parametrize("eta_c", [0.2, 0.5, 0.8])
    def test_zone_b_frequency(self, params, eta_c):
        n = 2000
        streams = SeedStreams(2024)
        cooperative = params.with_cooperativeness(eta_c)
        yields = sum(self._decide(cooperative, VehicleState(5.0, 0.0, 0.0, 1.0),
                                  streams.generator("drivers", i)).yielding for i in range(n))
        sigma = math.sqrt(n * eta_c * (1 - eta_c))
        assert abs(yields - n * eta_c) <= 3 * sigma


def _view(vehicle_id, role, state, lane, intent_lane, params=None, geom=None):
    return VehicleView(vehicle_id, role, state, geom or midpoint_driver().geom, lane, intent_lane, params)


class TestDriverStep:
    def _driver(self, params, quiet_settings, lane=2):
        return Driver(1, params, lane, np.random.default_rng(0), quiet_settings)

    def test_equilibrium(self, params, quiet_settings, road):
        driver = self._driver(params, quiet_settings)
        state = VehicleState(0.0, LANE_2, 0.0, params.v_ref)
        snapshot = TrafficSnapshot(0, 0.0, (_view(1, VehicleRole.DRIVER, state, 2, 2, params),))
        control = driver.step(snapshot, road, 0.4)
        assert control.a == pytest.approx(0.0, abs=1e-6)
        assert control.delta == pytest.approx(0.0, abs=1e-12)

    def test_yields_to_intruder(self, params, quiet_settings, road):
        cooperative = params.with_cooperativeness(1.0)
        driver = self._driver(cooperative, quiet_settings)
        me = _view(1, VehicleRole.DRIVER, VehicleState(0.0, LANE_2, 0.0, 3.0), 2, 2, cooperative)
        intruder = _view(2, VehicleRole.EGO, VehicleState(6.0, 1.0, 0.0, 0.0), 1, 2)
        control = driver.step(TrafficSnapshot(0, 0.0, (me, intruder)), road, 0.4)
        assert control.a < 0.0
        assert driver.last_decisions[2].zone == YieldZone.B_SELECTIVE
        assert driver.get_state_summary()["memory"]["yielding_to"] == [2]

    def test_aggressive_driver_ignores_zone_b(self, params, quiet_settings, road):
        aggressive = params.with_cooperativeness(0.0)
        driver = self._driver(aggressive, quiet_settings)
        me = _view(1, VehicleRole.DRIVER, VehicleState(0.0, LANE_2, 0.0, 3.0), 2, 2, aggressive)
        intruder = _view(2, VehicleRole.EGO, VehicleState(6.0, 1.0, 0.0, 0.0), 1, 2)
        assert driver.step(TrafficSnapshot(0, 0.0, (me, intruder)), road, 0.4).a > 0.0

    def test_steers_back_to_center(self, params, quiet_settings, road):
        driver = self._driver(params, quiet_settings)
        state = VehicleState(0.0, LANE_2 + 0.5, 0.0, 3.0)
        control = driver.step(TrafficSnapshot(0, 0.0, (_view(1, VehicleRole.DRIVER, state, 2, 2, params),)),
                              road, 0.4)
        assert control.delta < 0.0

    def test_missing_from_snapshot(self, params, quiet_settings, road):
        with pytest.raises(KeyError):
            self._driver(params, quiet_settings).step(TrafficSnapshot(0, 0.0, ()), road, 0.4)


def test_free_road_convergence(make_world, geom):
    world = make_world()
    vehicle_id = world.add_vehicle(VehicleRole.DRIVER, VehicleState(0.0, LANE_2, 0.0, 0.0), geom)
    for _ in range(200):
        world.step()
    vehicle = world.get_vehicle(vehicle_id)
    assert abs(vehicle.state.v - vehicle.driver.params.v_ref) <= 0.01 * vehicle.driver.params.v_ref


def test_seeded_worlds_are_identical(make_world, geom):
    def trace():
        world = make_world(seed=5, settings=DriverSettings())
        for i in range(6):
            world.add_vehicle(VehicleRole.DRIVER, VehicleState(-8.0 * i, LANE_2, 0.0, 2.0), geom)
        world.add_vehicle(VehicleRole.EGO, VehicleState(5.0, 0.0, 0.0, 1.0), geom, intent_lane=2)
        states = []
        for _ in range(20):
            snapshot = world.step()
            states.append([view.state for view in snapshot.vehicles])
        return states

    assert trace() == trace()


class TestRegime:
    def test_apply(self, params):
        assert Regime.COOPERATIVE.apply(params).eta_c == 1.0
        assert Regime.AGGRESSIVE.apply(params).eta_c == 0.0
        assert Regime.MIXED.apply(params) == params

    def test_parse(self):
        assert Regime.parse("cooperative") == Regime.COOPERATIVE
        assert Regime.parse("AGG") == Regime.AGGRESSIVE
        assert Regime.parse(Regime.MIXED) == Regime.MIXED
        with pytest.raises(ValueError):
            Regime.parse("polite")
