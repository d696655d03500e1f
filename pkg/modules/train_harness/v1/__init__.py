"""Train harness v1: AdamW, warmup + cosine schedule, VROC1 checkpoints, early stopping"""
from .config import TRAIN_PRESETS, TrainConfig, train_preset
from .schedule import lr_at
from .optimizer import AdamState, adamw_step
from .checkpoint import MAGIC, Checkpoint, config_hash, load_checkpoint, save_checkpoint
from .early_stopping import EarlyStopping
from .data import Classifier, RoundData, sample_examples
from .trainer import (
    BEST_CHECKPOINT,
    HISTORY_FILE,
    LAST_CHECKPOINT,
    EpochRecord,
    TrainResult,
    optimizer_update,
    resolve_schedule,
    run_config,
    train,
    validation_accuracy,
    write_history
)

__all__ = [
    "TRAIN_PRESETS",
    "TrainConfig",
    "train_preset",
    "lr_at",
    "AdamState",
    "adamw_step",
    "MAGIC",
    "Checkpoint",
    "config_hash",
    "load_checkpoint",
    "save_checkpoint",
    "EarlyStopping",
    "Classifier",
    "RoundData",
    "sample_examples",
    "BEST_CHECKPOINT",
    "HISTORY_FILE",
    "LAST_CHECKPOINT",
    "EpochRecord",
    "TrainResult",
    "optimizer_update",
    "resolve_schedule",
    "run_config",
    "train",
    "validation_accuracy",
    "write_history"
]
