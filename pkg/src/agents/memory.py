from typing import Any, Dict, Iterable, Optional


class Memory:
    """
    A driver's memory of yield episodes.

    Each intruder a driver has noticed gets one entry holding the yield
    decision drawn when the intruder entered the selective zone. The entry is
    kept until the intruder leaves both zones, so the decision is drawn once
    per episode and not once per tick.
    """

    def __init__(self, capacity: int = 32):
        """
        Initialize memory with a specific capacity.

        Args:
            capacity: Maximum number of simultaneous episodes to remember
        """
        self.capacity = capacity
        self.episodes: Dict[int, Dict[str, Any]] = {}

    def remember(self, intruder_id: int, yielding: bool, tick: int):
        """
        Store the decision for a new episode.

        Args:
            intruder_id: Vehicle the decision refers to
            yielding: Whether the driver yields to it
            tick: Tick at which the decision was drawn
        """
        self.episodes[intruder_id] = {"yielding": yielding, "since": tick}

        # oldest episodes go first when over capacity
        if len(self.episodes) > self.capacity:
            oldest = min(self.episodes, key=lambda key: self.episodes[key]["since"])
            del self.episodes[oldest]

    def recall(self, intruder_id: int) -> Optional[bool]:
        """
        Recall the decision of an open episode.

        Returns:
            The stored decision, or None when no episode is open
        """
        episode = self.episodes.get(intruder_id)
        return None if episode is None else episode["yielding"]

    def forget(self, intruder_id: int):
        """Close an episode."""
        self.episodes.pop(intruder_id, None)

    def forget_except(self, intruder_ids: Iterable[int]):
        """Close every episode whose intruder is not in the given set."""
        keep = set(intruder_ids)
        for key in [k for k in self.episodes if k not in keep]:
            del self.episodes[key]

    def copy(self) -> "Memory":
        clone = Memory(self.capacity)
        clone.episodes = {k: dict(v) for k, v in self.episodes.items()}
        return clone

    def get_summary(self) -> Dict[str, Any]:
        """
        Get a summary of the open episodes.

        Returns:
            Dictionary with memory summary
        """
        return {
            "open_episodes": len(self.episodes),
            "capacity": self.capacity,
            "yielding_to": sorted(k for k, v in self.episodes.items() if v["yielding"]),
        }
