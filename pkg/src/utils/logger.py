"""
Logging configuration for the wild-data toolkit.

This module sets up Loguru for interactive runs and batch pipelines.
Logs go to a console sink (colorized) and, optionally, to files rotated
daily. Run outputs never contain log text, so logging does not affect
output determinism.
"""

import sys
from pathlib import Path
from typing import Optional, TextIO

from loguru import logger

from src.core.config import get_settings


def setup_logger(
    sink: Optional[TextIO] = None,
    level: Optional[str] = None,
    to_file: Optional[bool] = None,
):
    """
    Configure application-wide logging.

    This function:
    1. Removes default logger (we want custom config)
    2. Adds console logging (colorized, formatted)
    3. Adds file logging (rotated, retained based on settings)
    4. Sets log level from configuration unless overridden

    Args:
        sink: Console stream (stdout by default; the CLI passes stderr)
        level: Level override, e.g. from a --log-level flag
        to_file: Override of settings.log_to_file

    Call this ONCE at application startup.
    """

    settings = get_settings()
    level = (level or settings.log_level).upper()
    to_file = settings.log_to_file if to_file is None else to_file

    logger.remove()

    # ============================================================================
    # CONSOLE LOGGING
    # ============================================================================

    logger.add(
        sink=sink or sys.stdout,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
            "<level>{level: <8}</level> | "
            "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
            "<level>{message}</level> | "
            "{extra}"
        ),
        level=level,
        colorize=True,
        backtrace=True,
        diagnose=False,
    )

    if not to_file:
        logger.debug("Logger initialized", log_level=level, file_logging=False)
        return logger

    # ============================================================================
    # FILE LOGGING
    # ============================================================================

    log_dir = Path(settings.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    file_format = (
        "{time:YYYY-MM-DD HH:mm:ss.SSS} | "
        "{level: <8} | "
        "{name}:{function}:{line} | "
        "{message} | "
        "{extra}"
    )

    logger.add(
        sink=log_dir / "wild_{time:YYYY-MM-DD}.log",
        format=file_format,
        level=level,
        rotation="00:00",
        retention=f"{settings.log_retention_days} days",
        compression="zip",
        encoding="utf-8",
        backtrace=True,
        diagnose=False,
    )

    # Errors are kept twice as long
    logger.add(
        sink=log_dir / "errors_{time:YYYY-MM-DD}.log",
        format=file_format,
        level="ERROR",
        rotation="00:00",
        retention=f"{settings.log_retention_days * 2} days",
        compression="zip",
        backtrace=True,
        diagnose=False,
    )

    logger.debug(
        "Logger initialized",
        log_level=level,
        retention_days=settings.log_retention_days,
        log_directory=str(log_dir.absolute())
    )

    return logger


def get_logger():
    """
    Get configured logger instance.

    Returns:
        Logger: Configured loguru logger

    Note:
        Call setup_logger() once at app startup before using this.
    """
    return logger
