"""Run settings: presets, config files, environment and flags"""
from .models import Preset, RunConfig
from .service import (
    LOG_LEVEL_ENV,
    RUN_CONFIG_FILE,
    THREADS_ENV,
    build_run_config,
    load_config_file,
    log_level,
    resolve_threads,
    write_run_config
)

__all__ = [
    "Preset",
    "RunConfig",
    "LOG_LEVEL_ENV",
    "RUN_CONFIG_FILE",
    "THREADS_ENV",
    "build_run_config",
    "load_config_file",
    "log_level",
    "resolve_threads",
    "write_run_config"
]
