"""
Logging configuration and utilities

Console records go to stderr; stdout carries reports and CSV.
"""
import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from .config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


def setup_logging(level: Optional[str] = None):
    """(Re)configure the sinks; level overrides settings.log_level"""
    level = (level or settings.log_level).upper()

    # Remove previous handlers
    logger.remove()

    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=sys.stderr.isatty())

    # Optional rotating file handler
    if settings.log_file:
        log_path = Path(settings.log_dir) / settings.log_file
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path,
            format=FILE_FORMAT,
            level=level,
            rotation="10 MB",
            retention="1 week",
            compression="zip",
        )

    return logger


# Initialize logging
app_logger = setup_logging()
