"""Shared scoring utilities for training validation and evaluation"""
from typing import List, Sequence, Tuple

import numpy as np

from core.minimap import Outcome


def predicted_class(logits: Sequence[float]) -> int:
    """
    Class index from two-class logits.

    Equal logits resolve to defender win (index 1).

    Args:
        logits: [attacker_win, defender_win] scores

    Returns:
        0 or 1
    """
    return 0 if logits[0] > logits[1] else 1


def predicted_classes(logits: np.ndarray) -> np.ndarray:
    """Row-wise predicted_class over [N, 2] logits"""
    logits = np.asarray(logits)
    return np.where(logits[:, 0] > logits[:, 1], 0, 1)


def per_second_counts(
    predictions: Sequence[Sequence[int]],
    outcomes: Sequence[Outcome]
) -> Tuple[List[int], List[int]]:
    """
    Count correct predictions and rounds still in progress per second.

    predictions[i][t - 1] is round i's class at second t; a round with
    d predictions is alive for t = 1..d.

    Returns:
        (correct, alive), index t - 1 for second t
    """
    horizon = max((len(p) for p in predictions), default=0)
    correct = [0] * horizon
    alive = [0] * horizon
    for preds, outcome in zip(predictions, outcomes):
        truth = Outcome(outcome).label
        for i, cls in enumerate(preds):
            alive[i] += 1
            correct[i] += int(cls == truth)
    return correct, alive
