"""Run configuration loading and validation."""

import json
import logging
from pathlib import Path
from typing import Any, Optional

from jsonschema import ValidationError as SchemaValidationError
from jsonschema import validate
from pydantic import ValidationError

from .config_models import RunConfig
from .constants import ErrorMessages
from .errors import ConfigError

logger = logging.getLogger(__name__)

_POSITIVE_INT = {"type": "integer", "minimum": 1}
_NON_NEGATIVE_INT = {"type": "integer", "minimum": 0}
_POSITIVE_NUMBER = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE_NUMBER = {"type": "number", "minimum": 0}
_PATH = {"type": ["string", "null"], "minLength": 1}

# Flat JSON object, one key per RunConfig field
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "num_workers": _POSITIVE_INT,
        "user_cpu": _POSITIVE_INT,
        "worker_memory_mb": _POSITIVE_INT,
        "worker_cores": _POSITIVE_INT,
        "keepalive_s": _NON_NEGATIVE_NUMBER,
        "sweep_interval_s": _POSITIVE_NUMBER,
        "scheduler_policy": {"type": "string"},
        "allocation_policy": {"type": "string"},
        "cost_mode": {"type": "string"},
        "vcpu_conf_threshold": _NON_NEGATIVE_INT,
        "mem_conf_threshold": _NON_NEGATIVE_INT,
        "default_vcpus": _POSITIVE_INT,
        "default_mem_mb": _POSITIVE_INT,
        "deficit_step_s": _POSITIVE_NUMBER,
        "slack_step_s": _POSITIVE_NUMBER,
        "vcpu_alpha_over": _POSITIVE_NUMBER,
        "vcpu_alpha_under": _POSITIVE_NUMBER,
        "mem_alpha_over": _POSITIVE_NUMBER,
        "mem_alpha_under": _POSITIVE_NUMBER,
        "c_max": {"type": "integer", "minimum": 2},
        "mem_max_mb": _POSITIVE_INT,
        "learning_rate": _NON_NEGATIVE_NUMBER,
        "sampling_interval_ms": _POSITIVE_NUMBER,
        "audit": {"type": "boolean"},
        "slo_multiplier": _POSITIVE_NUMBER,
        "target_rps": _POSITIVE_NUMBER,
        "window_minutes": {"type": "integer", "minimum": 1, "maximum": 1440},
        "seed": _NON_NEGATIVE_INT,
        "trace_path": _PATH,
        "catalog_path": _PATH,
        "schedule_path": _PATH,
        "output_dir": {"type": "string", "minLength": 1},
        "debug": {"type": "boolean"},
    },
    "required": [],
    "additionalProperties": False,
}


def validate_config_data(data: Any) -> tuple[bool, str]:
    """Validate configuration data against the schema.

    Returns: (is_valid, error_message)
    """
    try:
        validate(instance=data, schema=CONFIG_SCHEMA)
        return True, ""
    except SchemaValidationError as e:
        location = ".".join(str(p) for p in e.absolute_path)
        prefix = f"{location}: " if location else ""
        return False, ErrorMessages.CONFIG_INVALID.format(prefix + e.message)


def load_config(config_file: Optional[Path] = None) -> RunConfig:
    """Load and validate a run configuration.

    Args:
        config_file: Flat JSON config file. None gives the defaults.

    Raises:
        ConfigError: file missing, unreadable, or invalid.
    """
    if config_file is None:
        return RunConfig()

    config_file = Path(config_file)
    if not config_file.exists():
        raise ConfigError(ErrorMessages.CONFIG_NOT_FOUND.format(config_file))

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read configuration {config_file}: {e}") from e

    ok, message = validate_config_data(data)
    if not ok:
        raise ConfigError(message)

    try:
        config = RunConfig.load_from_file(config_file)
    except ValidationError as e:
        raise ConfigError(ErrorMessages.CONFIG_INVALID.format(_first_error(e))) from e

    logger.debug(f"Loaded configuration from {config_file}")
    return config


def update_config_value(config: RunConfig, key: str, value: Any) -> RunConfig:
    """Return a re-validated copy of ``config`` with one field overridden."""
    if key not in RunConfig.model_fields:
        raise ConfigError(ErrorMessages.CONFIG_INVALID.format(f"unknown key '{key}'"))
    data = config.model_dump()
    data[key] = value
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(ErrorMessages.CONFIG_INVALID.format(_first_error(e))) from e


def save_config(config: RunConfig, config_file: Path) -> bool:
    """Save configuration to file. Returns True on success."""
    try:
        config.save_to_file(Path(config_file))
        logger.debug(f"Configuration saved to {config_file}")
        return True
    except OSError as e:
        logger.error(f"Error saving configuration: {e}")
        return False


def _first_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(p) for p in first.get('loc', ()))
    message = first.get('msg', str(error))
    return f"{location}: {message}" if location else message
