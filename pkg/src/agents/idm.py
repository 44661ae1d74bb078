"""Intelligent Driver Model car-following law.

a = a_max * [1 - (v / v_ref)^delta - (s* / s)^2],
s* = s0 + v * T + v * dv / (2 * sqrt(a_max * b)).
"""
import math

from src.agents.driver_params import DriverParams

FREE_ROAD_GAP = 1.0e4
MIN_GAP = 1.0e-3


def desired_gap(self_v: float, closing_rate_dv: float, params: DriverParams) -> float:
    """Dynamic desired gap s*, never below the jam distance s0."""
    dynamic = self_v * params.T_headway + self_v * closing_rate_dv / (
        2.0 * math.sqrt(params.a_max * params.b_comf))
    return params.s0 + max(0.0, dynamic)


def idm_acceleration(self_v: float, gap_s: float, closing_rate_dv: float,
                     params: DriverParams) -> float:
    """
    IDM acceleration against one leader.

    Args:
        self_v: Own speed (m/s)
        gap_s: Bumper-to-bumper gap to the leader (m); pass FREE_ROAD_GAP
            when there is no leader
        closing_rate_dv: Own speed minus leader speed (m/s)
        params: Driver parameters

    Returns:
        Acceleration clamped to [-2 * b_comf, a_max]
    """
    gap = max(gap_s, MIN_GAP)
    s_star = desired_gap(self_v, closing_rate_dv, params)
    accel = params.a_max * (
        1.0 - (self_v / params.v_ref) ** params.delta_exp - (s_star / gap) ** 2)
    return min(max(accel, -2.0 * params.b_comf), params.a_max)


def equilibrium_speed(gap_s: float, params: DriverParams, tolerance: float = 1e-6) -> float:
    """
    Speed at which IDM holds a steady gap behind a leader at the same speed.

    Zero at or below s0, v_ref on a free road.
    """
    if gap_s <= params.s0:
        return 0.0

    def accel(v: float) -> float:
        return 1.0 - (v / params.v_ref) ** params.delta_exp - ((params.s0 + v * params.T_headway) / gap_s) ** 2

    lo, hi = 0.0, params.v_ref
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if accel(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return lo
