"""Evaluation report models"""
from typing import List, Optional

from pydantic import BaseModel, Field

# Second t falls into bucket min(t, 99) // 25 for t >= 1; a 100th second counts with the last bucket
BUCKET_LABELS = ["0-24", "25-49", "50-74", "75-99"]
LATE_ROUND_START_S = 30


def bucket_of(t: int) -> int:
    return min(t, 99) // 25


class SecondAccuracy(BaseModel):
    t: int = Field(ge=1)
    alive: int = Field(ge=0)
    correct: int = Field(ge=0)

    @property
    def accuracy(self) -> float:
        return self.correct / self.alive


class AccuracyReport(BaseModel):
    """
    Per-second accuracy of one model over a round set.

    `overall` is the unweighted mean of per-second accuracies; each bucket is
    the unweighted mean of its seconds (None when no round reaches it).
    Reports rendered from published numbers carry no per-second rows.
    """
    model_id: str
    per_second: List[SecondAccuracy] = Field(default_factory=list)
    overall: float = Field(ge=0.0, le=1.0)
    buckets: List[Optional[float]]
    n_rounds: int = 0

    @property
    def curve(self) -> List[float]:
        return [s.accuracy for s in self.per_second]

    def mean_from(self, start_s: int = LATE_ROUND_START_S) -> Optional[float]:
        """Mean per-second accuracy from `start_s` on"""
        tail = [s.accuracy for s in self.per_second if s.t >= start_s]
        return sum(tail) / len(tail) if tail else None
