from typing import Dict

import numpy as np

# stream ids are part of the reproducibility contract; append, never renumber
STREAMS: Dict[str, int] = {
    "scenario": 0,
    "drivers": 1,
    "controller": 2,
    "noise": 3,
    "export": 4,
    "spawn": 5,
}


class SeedStreams:
    """
    Independent random streams derived from one root seed.

    Each named subsystem gets its own SeedSequence child keyed by a fixed
    stream id (plus an optional index), so adding draws in one subsystem never
    shifts the numbers another subsystem sees.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def sequence(self, name: str, *index: int) -> np.random.SeedSequence:
        if name not in STREAMS:
            raise KeyError(f"unknown random stream '{name}'")
        return np.random.SeedSequence(self.seed, spawn_key=(STREAMS[name],) + tuple(int(i) for i in index))

    def generator(self, name: str, *index: int) -> np.random.Generator:
        """
        Get a fresh generator for a named stream.

        Args:
            name: Stream name (see STREAMS)
            index: Optional sub-indices, e.g. a vehicle id

        Returns:
            numpy Generator; equal arguments always give equal streams
        """
        return np.random.default_rng(self.sequence(name, *index))

    def __repr__(self) -> str:
        return f"SeedStreams(seed={self.seed})"
