"""Root logger setup for the command line.

Trajectories run on a worker pool, so records carry the thread name.
"""
from __future__ import annotations

import logging

_FMT = "%(asctime)s %(levelname)s [%(threadName)s] %(name)s: %(message)s"
_DATEFMT = "%Y-%m-%dT%H:%M:%S%z"


def setup_logging(level: str = "INFO") -> None:
    """Send twirlkit logs to stderr; stdout stays free for results."""
    root = logging.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)

    root.setLevel(getattr(logging, (level or "INFO").upper(), logging.INFO))
    sh = logging.StreamHandler()
    sh.setFormatter(logging.Formatter(_FMT, datefmt=_DATEFMT))
    root.addHandler(sh)

    # SQLAlchemy echoes every statement of the run store at INFO.
    logging.getLogger("sqlalchemy.engine").setLevel(logging.WARNING)
