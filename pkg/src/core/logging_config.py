"""
structlog setup for diagnostic logging.

Diagnostic logs go to stderr. The simulation EventLog is a separate artifact
and never passes through here.
"""

import logging
import sys

import structlog

from .config import LoggingConfig


def configure_logging(config: LoggingConfig) -> None:
    """
    Install the structlog processor chain for the given settings.

    Args:
        config: Level and renderer choice (json or text)
    """
    logging.basicConfig(stream=sys.stderr, format="%(message)s", level=config.level, force=True)

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if config.format == "json"
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            renderer,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
