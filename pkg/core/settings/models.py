"""Run configuration models"""
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class Preset(str, Enum):
    """Model and training scale"""
    DESK = "desk"
    PAPER = "paper"


class RunConfig(BaseModel):
    """
    Resolved settings of one CLI run, written next to its outputs.

    Sections hold plain key/value overrides for the stage configs
    (SimConfig, ModelConfig, TrainConfig, VisionConfig); each stage
    validates its own section.
    """
    command: str
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    preset: Preset = Preset.DESK
    config_file: Optional[str] = None
    sim: Dict[str, Any] = Field(default_factory=dict)
    model: Dict[str, Any] = Field(default_factory=dict)
    train: Dict[str, Any] = Field(default_factory=dict)
    vision: Dict[str, Any] = Field(default_factory=dict)
    paths: Dict[str, str] = Field(default_factory=dict)
