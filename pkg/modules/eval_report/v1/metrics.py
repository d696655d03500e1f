"""Per-second predictions and accuracy curves"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence

from core.errors import EmptySetError
from core.minimap import EventKind, EventLabel, Outcome
from core.round_store import RoundRecord, split_rank_key
from core.utils import per_second_counts, predicted_class
from modules.train_harness.v1 import Classifier, RoundData
from .models import BUCKET_LABELS, AccuracyReport, SecondAccuracy, bucket_of

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE = 100


def predict_round(
    classifier: Classifier,
    read_frame,
    events: Sequence[EventLabel],
    duration_s: int,
    batch_size: int = 16,
    threads: int = 1
) -> List[int]:
    """
    Class predicted at every second 1..duration_s (0 attacker win, 1 defender win).

    The prediction at t sees only frames and events before second t.
    """
    seconds = list(range(1, duration_s + 1))
    logits = classifier.predict_logits(read_frame, events, seconds, batch_size, threads)
    return [predicted_class(row) for row in logits]


def accuracy_curve(
    predictions: Mapping[str, Sequence[int]],
    outcomes: Mapping[str, Outcome],
    model_id: str
) -> AccuracyReport:
    """
    Per-second accuracy over rounds still in progress at each second.

    Args:
        predictions: round id -> class per second (index t - 1)
        outcomes: round id -> true outcome
        model_id: Label of the evaluated model

    Raises:
        EmptySetError: no rounds
    """
    round_ids = sorted(predictions)
    if not round_ids:
        raise EmptySetError("accuracy curve over an empty round set")
    correct, alive = per_second_counts([predictions[r] for r in round_ids], [outcomes[r] for r in round_ids])
    per_second = [
        SecondAccuracy(t=i + 1, alive=alive[i], correct=correct[i])
        for i in range(len(alive)) if alive[i] > 0
    ]
    if not per_second:
        raise EmptySetError("no second was predicted")
    curve = [s.accuracy for s in per_second]
    members: List[List[float]] = [[] for _ in BUCKET_LABELS]
    for s in per_second:
        members[bucket_of(s.t)].append(s.accuracy)
    return AccuracyReport(
        model_id=model_id,
        per_second=per_second,
        overall=sum(curve) / len(curve),
        buckets=[sum(m) / len(m) if m else None for m in members],
        n_rounds=len(round_ids)
    )


def sample_rounds(records: Sequence[RoundRecord], n: Optional[int] = DEFAULT_SAMPLE, seed: int = 0) -> List[RoundRecord]:
    """Seeded sample of n rounds (all when n is None or larger than the set)"""
    ranked = sorted(records, key=lambda r: split_rank_key(r.round_id, seed))
    return ranked if n is None else ranked[:n]


def without_kind(events: Sequence[EventLabel], kind: Optional[EventKind]) -> List[EventLabel]:
    return list(events) if kind is None else [e for e in events if e.kind is not kind]


def predict_rounds(
    classifier: Classifier,
    data: RoundData,
    records: Sequence[RoundRecord],
    threads: int = 1,
    batch_size: int = 16,
    drop_kind: Optional[EventKind] = None
) -> Dict[str, List[int]]:
    """Per-second predictions for many rounds, fanned out one round per worker"""
    def run(record: RoundRecord) -> List[int]:
        events = without_kind(data.events_for(record), drop_kind)
        return predict_round(classifier, data.reader(record), events, record.duration_s, batch_size)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, records))
    return {r.round_id: preds for r, preds in zip(records, results)}


def evaluate_model(
    classifier: Classifier,
    data: RoundData,
    records: Sequence[RoundRecord],
    model_id: str,
    threads: int = 1,
    drop_kind: Optional[EventKind] = None
) -> AccuracyReport:
    if not records:
        raise EmptySetError("no rounds to evaluate")
    predictions = predict_rounds(classifier, data, records, threads, drop_kind=drop_kind)
    report = accuracy_curve(predictions, {r.round_id: r.outcome for r in records}, model_id)
    logger.info(f"{model_id}: overall {100 * report.overall:.2f}% over {len(records)} rounds")
    return report


def ablation(
    classifier: Classifier,
    data: RoundData,
    records: Sequence[RoundRecord],
    model_id: str,
    threads: int = 1
) -> List[AccuracyReport]:
    """Re-evaluate an event-fused model with each event kind removed in turn"""
    reports = []
    for kind in EventKind:
        report = evaluate_model(classifier, data, records, f"{model_id} without {kind.value}", threads, kind)
        reports.append(report)
    return reports
