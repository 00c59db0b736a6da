from .config import (
    ConfigError,
    DriftSection,
    ExperimentSection,
    FULL_SCALE_PRESET,
    PolicySection,
    RunConfig,
    TrainingSection,
    default_config,
    load_config,
    save_config,
)
from .wire import (
    PROTOCOL_VERSION,
    WireError,
    decode_message,
    error_frame,
    load_schema,
    state_frame,
    validate_control,
    validate_target,
)
from .cli import run_cli, main

__all__ = [
    "ConfigError", "DriftSection", "ExperimentSection", "FULL_SCALE_PRESET",
    "PolicySection", "RunConfig", "TrainingSection", "default_config",
    "load_config", "save_config", "PROTOCOL_VERSION", "WireError",
    "decode_message", "error_frame", "load_schema", "state_frame",
    "validate_control", "validate_target", "run_cli", "main",
]
