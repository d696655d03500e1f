"""Training configuration and presets"""
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class TrainConfig(BaseModel):
    """
    AdamW with linear warmup and cosine annealing, early stopping on
    validation accuracy.

    total_steps is usually left unset and derived from the number of
    training rounds (epochs x ceil(n_train / batch_size)).
    """
    lr_max: float = Field(default=1e-4, gt=0.0)
    lr_min: float = Field(default=0.0, ge=0.0)
    weight_decay: float = Field(default=1e-4, ge=0.0)
    warmup_steps: int = Field(default=5000, ge=0)
    total_steps: Optional[int] = Field(default=None, gt=0)
    epochs: int = Field(default=300, gt=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0.0)
    batch_size: int = Field(default=16, gt=0)
    patience: int = Field(default=30, ge=1)
    seed: int = 0
    events_enabled: bool = False
    val_stride_s: int = Field(default=5, ge=1)

    @model_validator(mode="after")
    def _schedule(self):
        if self.total_steps is not None and self.warmup_steps >= self.total_steps:
            raise ValueError(f"warmup_steps {self.warmup_steps} must be below total_steps {self.total_steps}")
        if self.lr_min > self.lr_max:
            raise ValueError("lr_min exceeds lr_max")
        b1, b2 = self.betas
        if not (0.0 <= b1 < 1.0 and 0.0 <= b2 < 1.0):
            raise ValueError(f"betas must lie in [0, 1): {self.betas}")
        return self


TRAIN_PRESETS: Dict[str, Dict[str, object]] = {
    "paper": {"lr_max": 1e-4, "warmup_steps": 5000, "epochs": 300, "batch_size": 16, "patience": 30},
    "desk": {"lr_max": 5e-4, "warmup_steps": 500, "epochs": 80, "batch_size": 16, "patience": 30},
}


def train_preset(name: str, **overrides) -> TrainConfig:
    """TrainConfig from a named preset with optional field overrides"""
    if name not in TRAIN_PRESETS:
        raise KeyError(f"Unknown train preset: {name}. Must be one of: {', '.join(TRAIN_PRESETS)}")
    return TrainConfig(**{**TRAIN_PRESETS[name], **overrides})
