"""Logging setup for CLI runs."""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from .config import get_settings


def configure_logging(level: Optional[str] = None) -> None:
    """Install a rich handler on the root logger.

    Args:
        level: Log level name; defaults to ``Settings.LOG_LEVEL``
    """
    settings = get_settings()
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=settings.LOG_FORMAT,
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
        force=True,
    )
