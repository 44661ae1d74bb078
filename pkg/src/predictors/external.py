import json
import logging
import queue
import subprocess
import sys
import threading
from typing import List, Optional, Sequence

import numpy as np

from src.predictors.base import (ObservationWindow, PredictionSheet, Predictor,
                                 PredictorTimeoutError, ShapeMismatchError)

logger = logging.getLogger(__name__)

DEFAULT_COMMAND = (sys.executable, "-m", "src.predictors.cv_server")


class _Connection:
    """One child process speaking JSON lines on stdin/stdout."""

    def __init__(self, command: Sequence[str]):
        self.process = subprocess.Popen(
            list(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)
        self.responses: "queue.Queue[str]" = queue.Queue()
        self._reader = threading.Thread(target=self._read, daemon=True)
        self._reader.start()

    def _read(self):
        for line in self.process.stdout:
            self.responses.put(line)

    def request(self, payload: dict, timeout: float) -> dict:
        self.process.stdin.write(json.dumps(payload) + "\n")
        self.process.stdin.flush()
        try:
            line = self.responses.get(timeout=timeout)
        except queue.Empty:
            raise PredictorTimeoutError(f"no response within {timeout * 1000:.0f} ms")
        return json.loads(line)

    @property
    def alive(self) -> bool:
        return self.process.poll() is None

    def close(self):
        if self.alive:
            try:
                self.process.stdin.close()
                self.process.wait(timeout=1.0)
            except (OSError, subprocess.TimeoutExpired):
                self.process.kill()
                self.process.wait()


class ExternalPredictor(Predictor):
    """
    Adapter for a predictor running in another process.

    Each request is one JSON object per line:
    {"t_obs": ..., "t_pred": ..., "vehicles": [[[x, y], ...], ...], "ego_index": ..., "ego_plan": [[x, y], ...]}
    and each response {"pred": [[[x, y], ...], ...]} in the same vehicle order.
    A response slower than the deadline raises PredictorTimeoutError and the
    connection is replaced, since its late answer would desynchronize it.
    """

    kind = "external"

    def __init__(self, t_obs: int = 8, t_pred: int = 2,
                 command: Optional[Sequence[str]] = None, deadline: float = 0.05,
                 pool_size: int = 2, startup_timeout: float = 10.0):
        """
        Start the connection pool.

        Args:
            t_obs: Rows of history sent per vehicle
            t_pred: Rows expected back per vehicle
            command: Command line of the predictor server
            deadline: Seconds a single request may take
            pool_size: Number of server processes
            startup_timeout: Seconds allowed for each server's first answer
        """
        super().__init__(t_obs, t_pred)
        self.command = tuple(command) if command else DEFAULT_COMMAND
        self.deadline = deadline
        self.startup_timeout = startup_timeout
        self.pool: "queue.Queue[_Connection]" = queue.Queue()
        self._all: List[_Connection] = []
        self._lock = threading.Lock()
        for _ in range(max(1, pool_size)):
            self.pool.put(self._connect())

    def _connect(self) -> _Connection:
        connection = _Connection(self.command)
        reply = connection.request({"ping": True}, self.startup_timeout)
        if not reply.get("pong"):
            connection.close()
            raise RuntimeError(f"predictor server {self.command} did not answer the handshake")
        with self._lock:
            self._all.append(connection)
        return connection

    def _discard(self, connection: _Connection) -> None:
        connection.close()
        with self._lock:
            if connection in self._all:
                self._all.remove(connection)

    def predict(self, window: ObservationWindow,
                ego_plan: Optional[np.ndarray] = None) -> PredictionSheet:
        self.check_window(window, ego_plan)
        payload = {
            "t_obs": window.t_obs,
            "t_pred": self.t_pred,
            "vehicles": window.positions.tolist(),
            "ego_index": window.ego_index,
            "ego_plan": [] if ego_plan is None else np.asarray(ego_plan, dtype=float).tolist(),
        }

        connection = self.pool.get()
        try:
            reply = connection.request(payload, self.deadline)
        except PredictorTimeoutError:
            logger.warning("external predictor timed out", extra={"event": "predictor_timeout",
                                                                  "fields": {"deadline": self.deadline}})
            self._discard(connection)
            self.pool.put(self._connect())
            raise
        self.pool.put(connection)

        if "error" in reply:
            raise RuntimeError(f"predictor server error: {reply['error']}")
        positions = np.asarray(reply["pred"], dtype=float)
        expected = (window.n_vehicles, self.t_pred, 2)
        if positions.shape != expected:
            raise ShapeMismatchError(f"server returned {positions.shape}, expected {expected}")
        return PredictionSheet(window.vehicle_ids, positions)

    def close(self) -> None:
        with self._lock:
            for connection in self._all:
                connection.close()
            self._all = []
