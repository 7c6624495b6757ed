"""
LOGGING CONFIGURATION MODULE
=============================

One rotating log file plus a stderr console for the ownership-entropy toolkit.
Library modules only call get_logger(__name__); the CLI calls setup_logging once.

Levels in use:
    DEBUG    per-branch search detail, axiom checks
    INFO     completed stages (edges parsed, fits, calibration outcomes)
    WARNING  validity alarms, boundary and asymptotic optima
    ERROR    failed commands
    CRITICAL invalid environment
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

LEVELS = {
    'DEBUG': logging.DEBUG,
    'INFO': logging.INFO,
    'WARNING': logging.WARNING,
    'ERROR': logging.ERROR,
    'CRITICAL': logging.CRITICAL,
}


def _file_handler(log_file, max_bytes, backup_count) -> logging.Handler:
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)
    try:
        return RotatingFileHandler(log_file, maxBytes=max_bytes, backupCount=backup_count)
    except OSError:
        # e.g. os.devnull cannot be rotated
        return logging.FileHandler(log_file)


def setup_logging(log_level=logging.INFO, log_file='ownership_entropy.log',
                  console_level=logging.WARNING, max_bytes=5 * 1024 * 1024,
                  backup_count=3):
    """
    Attach the file and console handlers to the root logger.

    Does nothing when the root logger already has handlers (a second CLI call
    in one process, or a test runner that installed its own).

    Args:
        log_level (int): level for the log file
        log_file (str): log file path; parent directories are created
        console_level (int): level for stderr; the CLI passes ERROR for --quiet
        max_bytes (int): rotation size
        backup_count (int): rotated files kept

    Returns:
        logging.Logger: the root logger
    """
    root = logging.getLogger()
    if root.handlers:
        return root

    root.setLevel(min(log_level, console_level))
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    file_handler = _file_handler(log_file, max_bytes, backup_count)
    file_handler.setLevel(log_level)

    # stdout stays free for tables and piped CSV
    console_handler = logging.StreamHandler()
    console_handler.setLevel(console_level)

    for handler in (file_handler, console_handler):
        handler.setFormatter(formatter)
        root.addHandler(handler)
    return root


def get_logger(name=None):
    return logging.getLogger(name)


def set_log_level(level):
    """Set the root logger and every attached handler to `level`."""
    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers:
        handler.setLevel(level)


def get_log_level_name(level):
    """Name of a numeric level, or 'UNKNOWN'.

    >>> get_log_level_name(logging.WARNING)
    'WARNING'
    """
    for name, value in LEVELS.items():
        if value == level:
            return name
    return "UNKNOWN"


def parse_log_level(name):
    """Numeric level for a case-insensitive name; INFO when unrecognized."""
    return LEVELS.get(str(name).strip().upper(), logging.INFO)
