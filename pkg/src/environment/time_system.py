class TimeSystem:
    """
    Manages the flow of simulated time: a fixed step size shared by every
    vehicle in the scene, and the tick counter.
    """

    def __init__(self, dt: float, time_limit: float = float("inf")):
        """
        Initialize the time system.

        Args:
            dt: Step size in seconds
            time_limit: Episode length in seconds
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.dt = dt
        self.time_limit = time_limit
        self.current_tick = 0

    def step(self):
        """Advance time by one tick."""
        self.current_tick += 1

    def get_tick(self) -> int:
        """Get the current absolute tick"""
        return self.current_tick

    def get_time(self) -> float:
        """Get the elapsed time in seconds"""
        return self.current_tick * self.dt

    def is_expired(self) -> bool:
        """Check whether the next step would start past the time limit"""
        # half a step of slack keeps 40.0 / 0.4 from tripping on float error
        return self.get_time() >= self.time_limit - 0.5 * self.dt

    def copy(self) -> "TimeSystem":
        clone = TimeSystem(self.dt, self.time_limit)
        clone.current_tick = self.current_tick
        return clone
