import json
import logging
import sys
from datetime import datetime, timezone
from typing import Optional

# attributes every LogRecord carries; anything else came in through `extra`
_RESERVED = set(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}


class JsonLinesFormatter(logging.Formatter):
    """
    One JSON object per record.

    Structured data is passed as extra={"event": ..., "fields": {...}}; the
    fields are flattened into the top-level object.
    """

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "ts": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "event": getattr(record, "event", "log"),
            "message": record.getMessage(),
        }
        fields = getattr(record, "fields", None)
        if isinstance(fields, dict):
            entry.update(fields)
        for key, value in vars(record).items():
            if key not in _RESERVED and key not in ("event", "fields") and key not in entry:
                entry[key] = value
        if record.exc_info:
            entry["exc"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str)


def setup_logging(level: str = "INFO", log_file: Optional[str] = None, stream=sys.stderr) -> logging.Logger:
    """
    Configure the root logger for a run.

    Args:
        level: Level name
        log_file: Optional path of a JSON-lines log file
        stream: Console stream

    Returns:
        The root logger
    """
    formatter = JsonLinesFormatter()
    handlers = [logging.StreamHandler(stream)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="w", encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(formatter)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level.upper())
    return root
