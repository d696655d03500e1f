"""Model configuration and presets"""
import hashlib
from enum import Enum
from typing import Dict

from pydantic import BaseModel, Field, model_validator


class ClipMode(str, Enum):
    """How the 8 input frames for a prediction at second t are chosen"""
    UNIFORM_HISTORY = "uniform_history"
    RECENT_WINDOW = "recent_window"


class ModelConfig(BaseModel):
    """Divided space-time attention classifier hyperparameters"""
    image_size: int = Field(gt=0)
    patch_size: int = Field(gt=0)
    frames_per_clip: int = Field(gt=0)
    d_model: int = Field(gt=0)
    n_layers: int = Field(gt=0)
    n_heads: int = Field(gt=0)
    mlp_ratio: int = Field(default=4, gt=0)
    dropout_p: float = Field(default=0.1, ge=0.0, lt=1.0)
    n_classes: int = 2
    fps: int = Field(default=8, gt=0)
    d_event: int = Field(default=128, gt=0)
    clip_mode: ClipMode = ClipMode.UNIFORM_HISTORY

    @model_validator(mode="after")
    def _divisible(self):
        if self.image_size % self.patch_size != 0:
            raise ValueError("image_size must be a multiple of patch_size")
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be a multiple of n_heads")
        if self.n_classes != 2:
            raise ValueError("the classifier head is two-class (attacker win, defender win)")
        return self

    @property
    def n_patches(self) -> int:
        return (self.image_size // self.patch_size) ** 2

    @property
    def patch_dim(self) -> int:
        return 3 * self.patch_size * self.patch_size

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    @property
    def n_tokens(self) -> int:
        return self.frames_per_clip * self.n_patches + 1

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


MODEL_PRESETS: Dict[str, Dict[str, object]] = {
    "paper": {
        "image_size": 224, "patch_size": 16, "frames_per_clip": 8, "d_model": 768,
        "n_layers": 12, "n_heads": 12, "dropout_p": 0.1, "fps": 8
    },
    "desk": {
        "image_size": 64, "patch_size": 8, "frames_per_clip": 8, "d_model": 64,
        "n_layers": 4, "n_heads": 4, "dropout_p": 0.1, "fps": 8
    },
}


def model_preset(name: str, **overrides) -> ModelConfig:
    """ModelConfig from a named preset with optional field overrides"""
    if name not in MODEL_PRESETS:
        raise KeyError(f"Unknown model preset: {name}. Must be one of: {', '.join(MODEL_PRESETS)}")
    return ModelConfig(**{**MODEL_PRESETS[name], **overrides})
