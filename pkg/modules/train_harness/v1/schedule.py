"""Learning-rate schedule"""
import math

from .config import TrainConfig


def lr_at(step: int, cfg: TrainConfig) -> float:
    """
    Linear warmup to lr_max over warmup_steps, then cosine annealing to lr_min
    at total_steps. Steps past total_steps stay at lr_min.
    """
    if cfg.total_steps is None:
        raise ValueError("lr_at needs total_steps")
    step = max(0, min(step, cfg.total_steps))
    warmup = cfg.warmup_steps
    if step < warmup:
        return cfg.lr_max * step / warmup
    progress = (step - warmup) / (cfg.total_steps - warmup)
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + math.cos(math.pi * progress))
