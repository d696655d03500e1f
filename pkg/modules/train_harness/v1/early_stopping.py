"""Patience-based early stopping on a score that should increase"""
import logging
from typing import Optional

logger = logging.getLogger(__name__)


class EarlyStopping:
    """
    Tracks the best epoch (1-indexed) and stops after `patience` epochs
    without a strict improvement.
    """

    def __init__(self, patience: int):
        if patience < 1:
            raise ValueError("patience must be at least 1")
        self.patience = patience
        self.best_score: Optional[float] = None
        self.best_epoch = 0
        self.last_epoch = 0

    def update(self, epoch: int, score: float) -> bool:
        """Record an epoch; returns True when it is the new best"""
        self.last_epoch = epoch
        if self.best_score is None or score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            return True
        return False

    @property
    def epochs_without_improvement(self) -> int:
        return self.last_epoch - self.best_epoch

    @property
    def should_stop(self) -> bool:
        return self.best_epoch > 0 and self.epochs_without_improvement >= self.patience
