"""
logging.py
--------------------
Console logging for hspg_ops with Prefect-style formatting.

Library code and the CLI log through `get_logger`; Prefect tasks and flows use
the Prefect run logger instead. Colours are only emitted when the handler
stream is a terminal, so captured CLI output stays plain text.
"""

# ---------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------

import logging
import sys
from datetime import datetime

from colorama import Fore, Style
from colorama import init as colorama_init

colorama_init()

PACKAGE_LOGGER = "hspg_ops"


class ConsoleFormatter(logging.Formatter):
    COLORS = {
        "DEBUG": Style.DIM + Fore.WHITE,
        "INFO": Fore.CYAN,
        "WARNING": Fore.YELLOW,
        "ERROR": Fore.RED + Style.BRIGHT,
        "CRITICAL": Fore.RED + Style.BRIGHT,
    }

    def __init__(self, use_color: bool = True):
        super().__init__()
        self.use_color = use_color

    def format(self, record):
        timestamp = datetime.fromtimestamp(record.created).strftime("%H:%M:%S.%f")[:-3]
        if self.use_color:
            level_color = self.COLORS.get(record.levelname, "")
            level_str = f"{level_color}{record.levelname:<8}{Style.RESET_ALL}"
        else:
            level_str = f"{record.levelname:<8}"
        message = record.getMessage()
        if record.exc_info:
            message = f"{message}\n{self.formatException(record.exc_info)}"
        return f"{timestamp} | {level_str} | {message}"


def get_logger(name: str = PACKAGE_LOGGER, level: int | None = None) -> logging.Logger:
    """Returns a logger under the package hierarchy.

    The console handler lives on the package logger only; module loggers
    (``hspg_ops.solvers`` etc.) propagate to it.

    Parameters
    ----------
    name : str, optional
        Logger name, by default the package logger.
    level : int | None, optional
        Level to set on the returned logger, by default left unchanged
        (the package logger starts at INFO).

    Returns
    -------
    logging.Logger
        The configured logger.
    """
    root = logging.getLogger(PACKAGE_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ConsoleFormatter(use_color=sys.stderr.isatty()))
        root.addHandler(handler)
        root.propagate = False
        root.setLevel(logging.INFO)

    logger = logging.getLogger(name)
    if level is not None:
        logger.setLevel(level)
    return logger


def set_verbosity(verbose: bool = False, quiet: bool = False):
    """Adjusts the package logger level from CLI flags."""
    if verbose:
        get_logger(level=logging.DEBUG)
    elif quiet:
        get_logger(level=logging.WARNING)
    else:
        get_logger(level=logging.INFO)
