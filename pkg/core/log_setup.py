"""
Loguru sink configuration shared by the command-line runner and the test suite.
"""

import sys
from pathlib import Path

from loguru import logger

from core.config_loader import LoggingConfig


def configure_logging(logging_config: LoggingConfig, console: bool = True) -> None:
    """
    Replace loguru's default handler with a rotating file sink and a console sink.

    Args:
        logging_config: Levels, format and log file path
        console: Also log to stderr
    """
    logger.remove()

    log_file = Path(logging_config.file)
    log_file.parent.mkdir(parents=True, exist_ok=True)
    logger.add(
        str(log_file),
        level=logging_config.level,
        format=logging_config.format,
        rotation="10 MB",
        retention="30 days",
        compression="zip",
    )

    if console:
        logger.add(
            sys.stderr,
            level=logging_config.console_level,
            format="<green>{time:HH:mm:ss}</green> | <level>{level}</level> | {message}",
            colorize=True,
        )
