"""
Shared configuration and logging helpers.

Defaults are read from the environment (optionally via a local ``.env``) so a
laptop run and a CI run can use different resolutions without touching code.
"""

import os
import logging
from typing import Callable, TypeVar

from dotenv import load_dotenv

T = TypeVar("T")


class ConfigurationError(ValueError):
    """Raised when an environment value or config file entry is invalid."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
load_dotenv()  # Load from .env if available


def _env(name: str, default: T, cast: Callable[[str], T]) -> T:
    raw = (os.getenv(name) or "").strip()
    if not raw:
        return default
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name}={raw!r} is not a valid value: {e}") from e


DEFAULT_NODES = _env("SOBOLEV_NODES", 400, int)
CONSTRAINT_TOL = _env("SOBOLEV_CONSTRAINT_TOL", 1e-8, float)
BC_TOL = _env("SOBOLEV_BC_TOL", 1e-8, float)
EL_TOL = _env("SOBOLEV_EL_TOL", 1e-4, float)
MAX_OUTER = _env("SOBOLEV_MAX_OUTER", 60, int)
WORKERS = _env("SOBOLEV_WORKERS", 4, int)
LOG_LEVEL = (os.getenv("SOBOLEV_LOG_LEVEL") or "INFO").strip().upper()

if DEFAULT_NODES < 8:
    raise ConfigurationError("SOBOLEV_NODES must be at least 8")
if WORKERS < 1:
    raise ConfigurationError("SOBOLEV_WORKERS must be positive")


def make_logger(name: str, tag: str) -> logging.Logger:
    """Create a subsystem logger with a bracket-tagged stream handler."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(f"[{tag}] %(levelname)s: %(message)s"))
        logger.addHandler(handler)
    logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    return logger
