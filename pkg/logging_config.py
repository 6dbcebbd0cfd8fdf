"""Logging for measureit.

Every module logs under the "measureit" namespace:

    DEBUG    one-child clamps in tree constructions, dimension trials, restriction sizes
    INFO     precision escalations, clamp summaries, Frank-Wolfe summaries, written documents
    WARNING  comparisons still undecided at the precision ceiling, ignored overrides,
             optimizer runs that hit the iteration limit
    ERROR    failed certificates and the message behind a nonzero exit status

Console records go to stderr so the result document on stdout stays clean.
`--verbose` lowers the console level to INFO.
"""

import logging
import logging.handlers

from pathlib import Path

from config_manager import ENABLE_FILE_LOGGING, FILE_LOG_LEVEL, ENABLE_STDOUT, STDOUT_LOG_LEVEL


class ColoredFormatter(logging.Formatter):
    """Colors the level name with ANSI codes."""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
    }
    RESET = '\033[0m'
    BOLD = '\033[1m'

    def format(self, record):
        levelname = record.levelname
        color = self.COLORS.get(levelname, self.RESET)
        record.levelname = f"{color}{self.BOLD}{levelname}{self.RESET}"
        try:
            return super().format(record)
        finally:
            # the file handler formats the same record afterwards
            record.levelname = levelname


def _level(name, default):
    return getattr(logging, str(name).upper(), default)


def configure_logging(console=ENABLE_STDOUT, console_level=STDOUT_LOG_LEVEL,
                      log_file=ENABLE_FILE_LOGGING, file_level=FILE_LOG_LEVEL):
    """(Re)build the handlers of the "measureit" logger and return it."""
    root = logging.getLogger("measureit")
    root.setLevel(logging.DEBUG)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    if console:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(_level(console_level, logging.WARNING))
        console_handler.setFormatter(ColoredFormatter(
            "%(levelname)-19s: \033[35m%(name)-30s\033[0m>>> %(message)s"
        ))
        root.addHandler(console_handler)

    if log_file:
        logs_dir = Path(__file__).parent / "logs"
        logs_dir.mkdir(exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            logs_dir / "measureit.log",
            maxBytes=10000000,  # 10MB
            backupCount=5
        )
        file_handler.setLevel(_level(file_level, logging.WARNING))
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        ))
        root.addHandler(file_handler)

    root.propagate = False
    return root


def set_console_level(level_name):
    """Change the console handler level, e.g. for --verbose."""
    level = _level(level_name, logging.INFO)
    for handler in logger.handlers:
        if not isinstance(handler, logging.handlers.RotatingFileHandler):
            handler.setLevel(level)


logger = configure_logging()
