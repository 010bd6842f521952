"""Logging utilities for lineint.

The library uses a logger named ``lineint``.  By default no handlers are
attached; consumers configure logging as they see fit.  :func:`set_debug` is a
convenience shortcut that adds a ``StreamHandler`` with ``DEBUG`` level.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger("lineint")

_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def _summarize(values: np.ndarray) -> str:
    """Return a short ``shape|norm`` description of *values* for log records."""
    arr = np.asarray(values)
    if arr.size == 0:
        return f"{arr.shape}|empty"
    return f"{arr.shape}|{np.linalg.norm(arr.ravel(), np.inf):.3e}"


def set_debug(enabled: bool = True) -> None:
    """Enable or disable lineint debug logging to stderr.

    Args:
        enabled: When *True*, adds a ``StreamHandler`` at ``DEBUG`` level
            to the ``lineint`` logger.  When *False*, removes all
            handlers and resets the level.
    """
    if enabled:
        if not logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(logging.Formatter(_FORMAT))
            logger.addHandler(handler)
        logger.setLevel(logging.DEBUG)
    else:
        logger.handlers.clear()
        logger.setLevel(logging.WARNING)


def configure_cli_logging(quiet: bool) -> None:
    """Attach a stderr handler at INFO (or WARNING when *quiet*) for CLI runs."""
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
    logger.setLevel(logging.WARNING if quiet else logging.INFO)
