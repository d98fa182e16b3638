"""
Configuration Module
===================

This module contains the configuration constants and settings for fotune.
It centralizes the tuning defaults, the logging layout and the parser for
the flat ``key=value`` run-configuration files used by the command line.
"""

import logging
import os
import re
from datetime import datetime
from logging.handlers import RotatingFileHandler
from typing import Dict, Optional, Tuple

import pytz

from fotune.exceptions import ConfigError

logger = logging.getLogger(__name__)


class Config:
    """
    Main configuration class containing application constants.

    Directory Structure:
    - LOG_DIR: Directory for rotating log files

    File Names:
    - OUTCOME_FILE: JSON summary written by the tuning commands
    - STEP_RESPONSE_FILE: Step response of the tuned loop
    - TRACE_FILE: Optimizer trace
    - REPORT_FILE: Plain-text report

    Timezone:
    - TIMEZONE: Timezone for report timestamps (FOTUNE_TIMEZONE overrides)
    """

    LOG_DIR = "logs"

    OUTCOME_FILE = "outcome.json"
    STEP_RESPONSE_FILE = "step_response.csv"
    TRACE_FILE = "trace.csv"
    REPORT_FILE = "report.txt"
    COMPARISON_TEXT_FILE = "comparison.txt"
    COMPARISON_CSV_FILE = "comparison.csv"
    COMPARISON_TRACES_FILE = "step_responses.csv"

    # 17 significant digits reproduce a float64 exactly
    CSV_PRECISION = 17

    TIMEZONE = pytz.timezone(os.getenv("FOTUNE_TIMEZONE", "UTC"))


class TuningDefaults:
    """
    Defaults of the numerical protocol.

    Sampling, horizon, setpoint, search box, Oustaloup band and swarm sizes
    are the standard tuning protocol; see DESIGN.md for the other choices.
    """

    SAMPLE_TIME = 0.01  # seconds
    HORIZON_SECONDS = 25.0
    SETPOINT = 1.0

    GAIN_BOUNDS = (0.0, 10.0)
    ORDER_BOUNDS = (0.0, 2.0)

    OUSTALOUP_ORDER = 5
    OUSTALOUP_OMEGA_LOW = 1.0e-6  # rad/s
    OUSTALOUP_OMEGA_HIGH = 1.0e3  # rad/s

    PSO_POPULATION = 150
    PSO_MAX_EVALUATIONS = 45000
    PSO_SEED = 0
    PSO_INERTIA = 0.729
    PSO_COGNITIVE = 1.49445
    PSO_SOCIAL = 1.49445
    PSO_WORKERS = 1

    SINGULARITY_EPS = 1.0e-6
    BARRIER_SCALE = 1.0e12
    SATURATION_ALPHA = 5.0  # seconds

    SETTLING_BAND = 0.02

    PHI0 = (1.0, 0.0, 1.0, 0.0, 1.0)


class LoggingConfig:
    """
    Logging configuration settings.
    """

    MAX_BYTES = 10 * 1024 * 1024  # 10 MB per log file
    BACKUP_COUNT = 5

    FORMAT = '%(asctime)s [%(levelname)s] (%(threadName)s) %(funcName)s:%(lineno)d - %(message)s'

    LEVEL_DEBUG = 'DEBUG'
    LEVEL_INFO = 'INFO'
    LEVEL_WARNING = 'WARNING'
    LEVEL_ERROR = 'ERROR'


def setup_logging(log_dir: Optional[str] = None, level: str = LoggingConfig.LEVEL_INFO) -> None:
    """
    Configure the root logger for command-line runs.

    Args:
        log_dir (str, optional): Directory for a rotating log file. Console
            only when omitted.
        level (str): Logging level name
    """
    handlers = [logging.StreamHandler()]
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"fotune_{datetime.now().strftime('%Y%m%d')}.log")
        handlers.append(RotatingFileHandler(log_file,
                                            maxBytes=LoggingConfig.MAX_BYTES,
                                            backupCount=LoggingConfig.BACKUP_COUNT))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LoggingConfig.FORMAT,
                        handlers=handlers,
                        force=True)


def get_current_timestamp() -> str:
    """
    Get current timestamp in the report timezone.

    Returns:
        str: Formatted timestamp string
    """
    return datetime.now(Config.TIMEZONE).strftime("%Y-%m-%d %H:%M:%S %Z")


def sanitize_filename(filename: str) -> str:
    """
    Sanitize a strategy label so it can be used as a file or column name.

    Args:
        filename (str): Original label

    Returns:
        str: Sanitized name safe for filesystem and CSV headers
    """
    filename = re.sub(r'[<>:"/\\|?*,\s]', '_', filename)
    filename = filename.strip(' ._')
    if not filename:
        filename = 'unnamed'
    return filename


# Run-configuration file -------------------------------------------------------

RUN_CONFIG_KEYS = (
    "sample_time", "horizon_seconds", "setpoint", "criterion",
    "weight.kind", "weight.alpha",
    "oustaloup.order", "oustaloup.omega_low", "oustaloup.omega_high",
    "bounds.kfp", "bounds.kfi", "bounds.kfd", "bounds.lambda", "bounds.mu",
    "fixed.kfp", "fixed.kfi", "fixed.kfd", "fixed.lambda", "fixed.mu",
    "pso.population", "pso.max_evaluations", "pso.seed",
    "pso.inertia", "pso.cognitive", "pso.social", "pso.workers",
    "singularity_eps", "prefilter.window", "phi0",
    "noise.std", "noise.seed",
)


def parse_key_values(text: str, allowed: Optional[Tuple[str, ...]] = None,
                     source: str = "<string>") -> Dict[str, str]:
    """
    Parse flat ``key=value`` text.

    Blank lines and lines starting with ``#`` are ignored.

    Args:
        text (str): File contents
        allowed (tuple, optional): Accepted keys; anything else is rejected
        source (str): Name used in error messages

    Returns:
        dict: Raw string values keyed by name

    Raises:
        ConfigError: On malformed lines, duplicates or unknown keys
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if allowed is not None and key not in allowed:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = value
    return values


def parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got '{value}'") from None


def parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got '{value}'") from None


def parse_float_list(key: str, value: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got '{value}'") from None


def parse_range(key: str, value: str) -> Tuple[float, float]:
    lo_hi = parse_float_list(key, value)
    if len(lo_hi) != 2:
        raise ConfigError(f"{key}: expected 'lo,hi', got '{value}'")
    if lo_hi[0] > lo_hi[1]:
        raise ConfigError(f"{key}: lower bound {lo_hi[0]} exceeds upper bound {lo_hi[1]}")
    return lo_hi


def read_run_config(path: str) -> Dict[str, str]:
    """
    Read a run-configuration file.

    Args:
        path (str): Path of the ``key=value`` file

    Returns:
        dict: Raw values; missing keys are filled in by the caller

    Raises:
        ConfigError: If the file is missing or malformed
    """
    try:
        with open(path, 'r') as f:
            text = f.read()
    except FileNotFoundError:
        raise ConfigError(f"Config file not found: {path}") from None
    values = parse_key_values(text, RUN_CONFIG_KEYS, source=path)
    logger.info(f"Loaded {len(values)} settings from {path}")
    return values
