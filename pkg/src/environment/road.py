from dataclasses import dataclass
from typing import List, Tuple


@dataclass(frozen=True)
class Road:
    """
    Straight multi-lane road segment.

    Lanes are numbered from 1 (rightmost, the dead-end lane) upward; lane k has
    its center at (k - 1) * lane_width. Positive y is to the left.
    """
    n_lanes: int = 3
    lane_width: float = 3.7
    x_end: float = 50.0

    def lane_center(self, lane: int) -> float:
        """
        Get the lateral coordinate of a lane center.

        Args:
            lane: Lane number (1-based)

        Returns:
            Lane center y in meters
        """
        if not 1 <= lane <= self.n_lanes:
            raise ValueError(f"lane {lane} outside 1..{self.n_lanes}")
        return (lane - 1) * self.lane_width

    def lane_of(self, y: float) -> int:
        """Lane number whose corridor contains y, clipped to the road."""
        lane = int(round(y / self.lane_width)) + 1
        return min(max(lane, 1), self.n_lanes)

    def lateral_bounds(self) -> Tuple[float, float]:
        """Outer road edges (y_min, y_max)."""
        half = 0.5 * self.lane_width
        return self.lane_center(1) - half, self.lane_center(self.n_lanes) + half

    def adjacent_lanes(self, lane: int) -> List[int]:
        return [n for n in (lane - 1, lane + 1) if 1 <= n <= self.n_lanes]

    @property
    def lanes(self) -> List[int]:
        return list(range(1, self.n_lanes + 1))
