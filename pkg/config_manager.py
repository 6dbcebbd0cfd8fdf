"""Centralized configuration management for measureit."""

import os
import tomllib
import logging
from fractions import Fraction
from pathlib import Path

logger = logging.getLogger("measureit.config_manager")


def load_config():
    """Load config.toml from the workspace root. Called once at import."""
    config_path = Path(__file__).parent / "config.toml"
    try:
        with open(config_path, "rb") as f:
            config = tomllib.load(f)
            logger.info("Config loaded successfully from config.toml")
            return config
    except FileNotFoundError:
        logger.error(f"config.toml not found at {config_path}")
        return {}
    except Exception as e:
        logger.error(f"Error loading config.toml: {e}")
        return {}


def _precision_override(default):
    """Apply FRACTAL_PRECISION if it holds a usable bit count."""
    raw = os.environ.get("FRACTAL_PRECISION")
    if not raw:
        return default
    try:
        bits = int(raw)
    except ValueError:
        logger.warning(f"Ignoring FRACTAL_PRECISION={raw!r}: not an integer")
        return default
    if bits < 64:
        logger.warning(f"Ignoring FRACTAL_PRECISION={bits}: at least 64 bits required")
        return default
    return bits


# Load config once at module import time
CONFIG = load_config()

NUMERIC_CONFIG = CONFIG.get("numeric", {})
SEARCH_CONFIG = CONFIG.get("search", {})
OPTIMIZER_CONFIG = CONFIG.get("optimizer", {})
OUTPUT_CONFIG = CONFIG.get("output", {})
SWEEP_CONFIG = CONFIG.get("sweep", {})
LOGGING_CONFIG = CONFIG.get("logging", {})

DEFAULT_PRECISION = _precision_override(NUMERIC_CONFIG.get("precision", 128))
MAX_PRECISION = max(NUMERIC_CONFIG.get("max_precision", 1024), DEFAULT_PRECISION)

SEARCH_TOLERANCE = Fraction(SEARCH_CONFIG.get("tolerance", "1/10"))

OPTIMIZER_ITERATIONS = OPTIMIZER_CONFIG.get("iterations", 200)
OPTIMIZER_TOLERANCE = Fraction(OPTIMIZER_CONFIG.get("tolerance", "1/1000000000"))

OUTPUT_FORMAT = OUTPUT_CONFIG.get("format", "json")
SCHEMA_TAG = OUTPUT_CONFIG.get("schema", "measureit/1")
ENABLE_TIMESTAMPS = OUTPUT_CONFIG.get("timestamps", True)
CERTIFICATE_LIMIT = OUTPUT_CONFIG.get("certificate_limit", 4096)

SWEEP_WORKERS = SWEEP_CONFIG.get("workers", 4)

ENABLE_FILE_LOGGING = LOGGING_CONFIG.get("file", False)
FILE_LOG_LEVEL = LOGGING_CONFIG.get("file_level", "WARNING")
ENABLE_STDOUT = LOGGING_CONFIG.get("stdout", True)
STDOUT_LOG_LEVEL = LOGGING_CONFIG.get("stdout_level", "INFO")
