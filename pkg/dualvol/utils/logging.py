"""Logging for the ``dmv`` logger tree.

Handlers live on the ``dmv`` logger; the root logger is left alone. Console output
goes to stderr, stdout carries reports.
"""
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

ROOT_LOGGER = "dmv"
DEFAULT_FORMAT = "[%(asctime)s] %(levelname)s %(name)s - %(message)s"

# ANSI colour codes per level
LEVEL_COLORS = {
    logging.DEBUG: "36",
    logging.INFO: "32",
    logging.WARNING: "33",
    logging.ERROR: "31",
    logging.CRITICAL: "35",
}


class ColoredFormatter(logging.Formatter):
    """Colours the level name of each line for terminal output."""

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        code = LEVEL_COLORS.get(record.levelno)
        if code is None:
            return text
        # record itself stays untouched
        return text.replace(record.levelname, f"\033[{code}m{record.levelname}\033[0m", 1)


def _is_tty(stream: TextIO) -> bool:
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


def setup_logging(
    log_level: str = "WARNING",
    log_file: Optional[str] = None,
    format_string: str = DEFAULT_FORMAT,
    stream: Optional[TextIO] = None
) -> logging.Logger:
    """Configure the ``dmv`` logger; calling again replaces the previous handlers.

    Args:
        log_level: DEBUG, INFO, WARNING or ERROR; unknown names fall back to WARNING
        log_file: Optional log file, its directory is created on demand
        format_string: Format for every handler
        stream: Console stream (defaults to stderr)

    Returns:
        The configured ``dmv`` logger
    """
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    stream = stream or sys.stderr
    console_handler = logging.StreamHandler(stream)
    formatter_cls = ColoredFormatter if _is_tty(stream) else logging.Formatter
    console_handler.setFormatter(formatter_cls(format_string))
    logger.addHandler(console_handler)

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(format_string))
        logger.addHandler(file_handler)

    level = logging.getLevelName(log_level.upper())
    logger.setLevel(level if isinstance(level, int) else logging.WARNING)
    return logger


def get_logger(name: str) -> logging.Logger:
    """Get a logger inside the ``dmv`` tree.

    Args:
        name: Dotted name such as ``dmv.recovery``; other names are nested under ``dmv``

    Returns:
        Logger instance
    """
    if name != ROOT_LOGGER and not name.startswith(f"{ROOT_LOGGER}."):
        name = f"{ROOT_LOGGER}.{name}"
    return logging.getLogger(name)
