#!/usr/bin/env python3
"""
Production Error Handler for the Slow-Light Simulator
Logging setup, error recording and the single-line error contract of the CLI
"""

import logging
import sys
import time
import traceback
from pathlib import Path
from typing import Any, Dict, Optional

from core.errors import SlowLightError

LOGGER_NAME = "slowlight"
ERROR_PREFIX = "error:"


def setup_logging(level: str = "INFO", log_dir: Optional[str] = None) -> logging.Logger:
    """
    Configure the simulator logger tree

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for a timestamped log file; console only when None

    Returns:
        The root simulator logger
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(getattr(logging, level.upper()))
    logger.propagate = False

    # Clear existing handlers
    logger.handlers.clear()

    # Console handler on the diagnostic stream
    console_handler = logging.StreamHandler(sys.stderr)
    console_formatter = logging.Formatter(
        '%(asctime)s | %(levelname)s | %(message)s',
        datefmt='%H:%M:%S'
    )
    console_handler.setFormatter(console_formatter)
    logger.addHandler(console_handler)

    if log_dir:
        path = Path(log_dir)
        path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(path / f"slowlight_{int(time.time())}.log")
        file_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)s | %(name)s:%(funcName)s:%(lineno)d | %(message)s'
        )
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

    # core.* modules log through the same handlers
    core_logger = logging.getLogger("core")
    core_logger.setLevel(logger.level)
    core_logger.handlers = list(logger.handlers)

    return logger


def error_code(error: BaseException) -> str:
    """Machine-readable code of an error"""
    if isinstance(error, SlowLightError):
        return error.code
    if isinstance(error, OSError):
        return "io_error"
    return "internal_error"


def render_error(error: BaseException) -> str:
    """The one `error: <code>: <message>` line printed on failure"""
    message = " ".join(str(error).split()) or type(error).__name__
    return f"{ERROR_PREFIX} {error_code(error)}: {message}"


class SimulationErrorHandler:
    """Records and logs failures of simulation operations"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(LOGGER_NAME)
        self.error_count = 0
        self.errors_by_code: Dict[str, int] = {}

    def handle_error(self, error: BaseException, operation: str) -> Dict[str, Any]:
        """
        Log an error and return its description

        Args:
            error: The exception that occurred
            operation: Description of the operation that failed

        Returns:
            Dict with error info
        """
        self.error_count += 1
        code = error_code(error)
        self.errors_by_code[code] = self.errors_by_code.get(code, 0) + 1

        error_info = {
            'operation': operation,
            'error_type': type(error).__name__,
            'error_code': code,
            'error_message': str(error),
            'timestamp': time.time(),
            'line': render_error(error),
        }
        for attribute in ('poles', 'window', 'lines', 'invariant'):
            if hasattr(error, attribute):
                error_info[attribute] = getattr(error, attribute)

        self.logger.debug(f"❌ {operation} failed: {error_info['error_type']}: {error_info['error_message']}")
        if code == "internal_error":
            self.logger.debug(f"Full traceback:\n{''.join(traceback.format_exception(type(error), error, error.__traceback__))}")
        return error_info

    def reset_error_count(self):
        self.error_count = 0
        self.errors_by_code.clear()
