"""
Reference predictor server for the external adapter.

Reads one JSON request per line from stdin and answers with constant-velocity
predictions on stdout. Run with `python -m src.predictors.cv_server`.
"""
import json
import logging
import sys

import numpy as np

from src.predictors.constant_velocity import extrapolate

logger = logging.getLogger(__name__)


def handle(request: dict) -> dict:
    """Answer one request."""
    if request.get("ping"):
        return {"pong": True}
    positions = np.asarray(request["vehicles"], dtype=float).reshape(-1, int(request["t_obs"]), 2)
    return {"pred": extrapolate(positions, int(request["t_pred"])).tolist()}


def serve(stdin=sys.stdin, stdout=sys.stdout):
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            reply = handle(json.loads(line))
        except (ValueError, KeyError) as exc:
            logger.error("bad request: %s", exc)
            reply = {"error": str(exc)}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()


if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    serve()
