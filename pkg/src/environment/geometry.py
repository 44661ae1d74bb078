"""
Three-circle vehicle footprint and the clearance measures built on it.

Each vehicle is covered by three circles of radius w whose centers sit on the
heading axis at offsets p * (h - w), p in {-1, 0, 1}. The control constraint
uses the squared form (squared center distance minus squared radius sum); the
reporting metric is a clearance in meters.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src.environment.dynamics import BodyGeometry, VehicleState

OFFSETS = (-1, 0, 1)
DEFAULT_EPSILON = 0.1


class GeometryError(ValueError):
    """Raised for footprints the three-circle model cannot represent."""


@dataclass(frozen=True)
class CircleSet:
    centers: Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]
    radius: float


def circle_centers(state: VehicleState, geom: BodyGeometry) -> CircleSet:
    """
    Compute the three circle centers of a vehicle.

    Args:
        state: Vehicle pose
        geom: Vehicle dimensions (h must exceed w)

    Returns:
        CircleSet with centers ordered p = -1, 0, 1
    """
    if geom.h <= geom.w:
        raise GeometryError(f"degenerate footprint: h={geom.h} <= w={geom.w}")

    offset = geom.h - geom.w
    cos_psi = math.cos(state.psi)
    sin_psi = math.sin(state.psi)
    centers = tuple(
        (state.x + p * offset * cos_psi, state.y + p * offset * sin_psi)
        for p in OFFSETS
    )
    return CircleSet(centers=centers, radius=geom.w)


def _center_distances_sq(ego: VehicleState, ego_geom: BodyGeometry,
                         other: VehicleState, other_geom: BodyGeometry) -> float:
    """Smallest squared distance between circle centers over the 9 pairs."""
    ego_offset = ego_geom.h - ego_geom.w
    other_offset = other_geom.h - other_geom.w
    ec, es = math.cos(ego.psi), math.sin(ego.psi)
    oc, os_ = math.cos(other.psi), math.sin(other.psi)

    best = math.inf
    for p in OFFSETS:
        ex = ego.x + p * ego_offset * ec
        ey = ego.y + p * ego_offset * es
        for q in OFFSETS:
            dx = ex - (other.x + q * other_offset * oc)
            dy = ey - (other.y + q * other_offset * os_)
            d = dx * dx + dy * dy
            if d < best:
                best = d
    return best


def pair_distance(ego: VehicleState, ego_geom: BodyGeometry,
                  other: VehicleState, other_geom: BodyGeometry) -> float:
    """
    Clearance measure g_i between two vehicles.

    Minimum over the nine circle pairs of the squared center distance minus
    (w + w_i)^2. Negative means the footprints overlap, zero means touching.
    Symmetric in its two vehicles.
    """
    radius_sum = ego_geom.w + other_geom.w
    return _center_distances_sq(ego, ego_geom, other, other_geom) - radius_sum * radius_sum


def is_safe(ego: VehicleState, ego_geom: BodyGeometry,
            others: Sequence[Tuple[VehicleState, BodyGeometry]],
            epsilon: float = DEFAULT_EPSILON) -> Tuple[bool, List[float]]:
    """
    Evaluate the collision constraint g_i >= epsilon against every other vehicle.

    Args:
        ego: Ego pose
        ego_geom: Ego dimensions
        others: (state, geometry) pairs of the other vehicles
        epsilon: Safety bound, non-negative; the boundary is inclusive

    Returns:
        Tuple of (safe, per-vehicle margins)
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")

    margins = [pair_distance(ego, ego_geom, state, geom) for state, geom in others]
    return all(m >= epsilon for m in margins), margins


def euclidean_min_gap(ego: VehicleState, ego_geom: BodyGeometry,
                      other: VehicleState, other_geom: BodyGeometry) -> float:
    """
    Clearance in meters between two footprints, clamped at 0 on overlap.

    Used for reporting only; the controller works with pair_distance.
    """
    center_gap = math.sqrt(_center_distances_sq(ego, ego_geom, other, other_geom))
    return max(0.0, center_gap - (ego_geom.w + other_geom.w))


def pair_distance_batch(ego: VehicleState, ego_geom: BodyGeometry,
                        positions: np.ndarray, headings: np.ndarray,
                        other_geom: BodyGeometry) -> np.ndarray:
    """
    Vectorized pair_distance of one ego against many vehicles sharing a geometry.

    Args:
        ego: Ego pose
        ego_geom: Ego dimensions
        positions: (N, 2) array of other-vehicle centers
        headings: (N,) array of other-vehicle headings
        other_geom: Geometry shared by the other vehicles

    Returns:
        (N,) array of clearance measures
    """
    if len(positions) == 0:
        return np.zeros(0)

    offsets = np.asarray(OFFSETS, dtype=float)
    ego_centers = np.stack([
        ego.x + offsets * (ego_geom.h - ego_geom.w) * math.cos(ego.psi),
        ego.y + offsets * (ego_geom.h - ego_geom.w) * math.sin(ego.psi),
    ], axis=-1)                                                   # (3, 2)
    shift = offsets[None, :, None] * (other_geom.h - other_geom.w) * np.stack(
        [np.cos(headings), np.sin(headings)], axis=-1)[:, None, :]  # (N, 3, 2)
    other_centers = positions[:, None, :] + shift                   # (N, 3, 2)
    diff = ego_centers[None, :, None, :] - other_centers[:, None, :, :]
    dist_sq = np.einsum("npqk,npqk->npq", diff, diff)
    radius_sum = ego_geom.w + other_geom.w
    return dist_sq.reshape(len(positions), -1).min(axis=1) - radius_sum * radius_sum
