# shapemetrics/core/logging.py
import logging
from typing import Optional

from shapemetrics.core.config import settings  # Import settings to use ENVIRONMENT

# Level based on environment, defaulting to INFO
log_level = logging.INFO
if settings.ENVIRONMENT in ("development", "test"):
    log_level = logging.DEBUG
if settings.LOG_LEVEL:
    log_level = logging.getLevelName(settings.LOG_LEVEL.upper())

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Check if handlers already exist to avoid re-configuring (pytest installs its own)
if not logging.root.handlers:
    # basicConfig writes to stderr, which keeps CSV on stdout clean
    logging.basicConfig(level=log_level, format=LOG_FORMAT)

logger = logging.getLogger(__name__)
logger.debug("Core logging configured.")


def get_logger(name: str):
    """Helper to get a logger instance for a specific module."""
    return logging.getLogger(name)


def set_level(level: Optional[int]) -> None:
    """Override the package log level (used by the CLI --verbose flag)."""
    if level is not None:
        logging.getLogger("shapemetrics").setLevel(level)
