"""
Settings resolution: built-in presets < config file < command-line flags.

Environment:
    MINIMAP_ORACLE_THREADS   worker threads when --threads is not given
    MINIMAP_ORACLE_LOG_LEVEL logging level (default INFO)
"""
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from core.errors import PipelineIOError
from core.round_store import write_json
from .models import Preset, RunConfig

logger = logging.getLogger(__name__)

THREADS_ENV = "MINIMAP_ORACLE_THREADS"
LOG_LEVEL_ENV = "MINIMAP_ORACLE_LOG_LEVEL"
RUN_CONFIG_FILE = "run_config.json"
SECTIONS = ("sim", "model", "train", "vision", "paths")


def resolve_threads(flag: Optional[int] = None) -> int:
    """--threads, then MINIMAP_ORACLE_THREADS, then the number of logical cores"""
    if flag is not None:
        return max(1, int(flag))
    env = os.getenv(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={env!r}")
    return os.cpu_count() or 1


def log_level(verbose: bool = False) -> int:
    if verbose:
        return logging.DEBUG
    name = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def load_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a TOML or JSON settings file (chosen by suffix).

    Raises:
        PipelineIOError: unreadable or malformed file
    """
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise PipelineIOError(f"cannot read config {path}: {e}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise PipelineIOError(f"malformed config {path}: {e}")


def build_run_config(
    command: str,
    flags: Optional[Dict[str, Any]] = None,
    config_file: Optional[Path] = None
) -> RunConfig:
    """
    Merge settings for one run.

    Args:
        command: Subcommand name
        flags: Flag values; top-level keys (seed, threads, preset) or
            section dicts; None values mean "not given"
        config_file: Optional TOML/JSON file with the same layout

    Returns:
        RunConfig with threads resolved
    """
    merged: Dict[str, Any] = {"command": command, **{s: {} for s in SECTIONS}}
    layers = []
    if config_file is not None:
        layers.append(load_config_file(config_file))
        merged["config_file"] = str(config_file)
    layers.append(flags or {})

    for layer in layers:
        for key, value in layer.items():
            if key in SECTIONS:
                merged[key].update({k: v for k, v in (value or {}).items() if v is not None})
            elif value is not None:
                merged[key] = value

    merged["threads"] = resolve_threads(merged.get("threads"))
    merged.setdefault("preset", Preset.DESK)
    return RunConfig(**merged)


def write_run_config(run_config: RunConfig, out_dir: Path) -> Path:
    path = Path(out_dir) / RUN_CONFIG_FILE
    write_json(path, run_config.model_dump(mode="json"))
    logger.info(f"Run config written to {path}")
    return path
