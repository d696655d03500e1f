"""Extraction fidelity against simulator ground truth"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from pydantic import BaseModel

from core.minimap import EventLabel
from core.round_store import EVENTS_FILE, ROUNDS_FILE, RoundRecord, read_jsonl
from modules.event_fusion.v1 import read_events
from .icons import Detection

logger = logging.getLogger(__name__)


class MatchCounts(BaseModel):
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(tp=self.tp + other.tp, fp=self.fp + other.fp, fn=self.fn + other.fn)

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


class ExtractionScore(BaseModel):
    """Round and event agreement between an extracted dataset and ground truth"""
    rounds_truth: int
    rounds_extracted: int
    rounds_matched: int
    boundaries_within_one_frame: int
    outcomes_exact: int
    events: MatchCounts

    @property
    def event_f1(self) -> float:
        return self.events.f1


def match_detections(
    predicted: Sequence[Detection],
    truth: Sequence[Tuple[str, str, int, int]],
    tolerance: int = 1
) -> MatchCounts:
    """
    Greedy one-to-one matching of detections to rendered icons.

    Args:
        predicted: Detections of one frame
        truth: (kind, agent or "", x, y) of every icon drawn
        tolerance: Max Chebyshev offset of a match in px
    """
    unmatched = list(truth)
    tp = 0
    for d in predicted:
        for i, (kind, agent, x, y) in enumerate(unmatched):
            if kind == d.kind.value and agent == (d.agent or "") and max(abs(x - d.x), abs(y - d.y)) <= tolerance:
                del unmatched[i]
                tp += 1
                break
    return MatchCounts(tp=tp, fp=len(predicted) - tp, fn=len(unmatched))


def match_events(
    predicted: Sequence[EventLabel],
    truth: Sequence[EventLabel],
    fps: int = 8,
    tolerance_frames: int = 1
) -> MatchCounts:
    """Greedy one-to-one matching on (kind, team, agent, area) within a frame tolerance"""
    unmatched = list(truth)
    tp = 0
    for e in predicted:
        for i, t in enumerate(unmatched):
            if (e.kind, e.team, e.agent, e.area) != (t.kind, t.team, t.agent, t.area):
                continue
            if abs(e.frame_index(fps) - t.frame_index(fps)) <= tolerance_frames:
                del unmatched[i]
                tp += 1
                break
    return MatchCounts(tp=tp, fp=len(predicted) - tp, fn=len(unmatched))


def _rounds_by_stream(data_dir: Path) -> Dict[str, List[RoundRecord]]:
    grouped: Dict[str, List[RoundRecord]] = {}
    for record in read_jsonl(data_dir / ROUNDS_FILE):
        r = RoundRecord(**record)
        grouped.setdefault(r.stream, []).append(r)
    return grouped


def score_extraction(extracted_dir: Path, truth_dir: Path, tolerance_frames: int = 1) -> ExtractionScore:
    """
    Compare an extracted dataset with the synthetic dataset its frames came from.

    Rounds are paired by stream and order; events are compared round by round.
    """
    extracted = _rounds_by_stream(extracted_dir)
    truth = _rounds_by_stream(truth_dir)
    extracted_events = read_events(extracted_dir / EVENTS_FILE) if (extracted_dir / EVENTS_FILE).exists() else {}
    truth_events = read_events(truth_dir / EVENTS_FILE) if (truth_dir / EVENTS_FILE).exists() else {}

    matched = boundaries = outcomes = 0
    counts = MatchCounts()
    for stream, truth_rounds in truth.items():
        found = extracted.get(stream, [])
        for t, e in zip(truth_rounds, found):
            matched += 1
            if abs(t.start_frame - e.start_frame) <= tolerance_frames and abs(t.end_frame - e.end_frame) <= tolerance_frames:
                boundaries += 1
            if t.outcome is e.outcome:
                outcomes += 1
            counts = counts + match_events(
                extracted_events.get(e.round_id, []), truth_events.get(t.round_id, []), t.fps, tolerance_frames
            )
        for t in truth_rounds[len(found):]:
            counts = counts + MatchCounts(fn=len(truth_events.get(t.round_id, [])))
        for e in found[len(truth_rounds):]:
            counts = counts + MatchCounts(fp=len(extracted_events.get(e.round_id, [])))

    score = ExtractionScore(
        rounds_truth=sum(len(r) for r in truth.values()),
        rounds_extracted=sum(len(r) for r in extracted.values()),
        rounds_matched=matched,
        boundaries_within_one_frame=boundaries,
        outcomes_exact=outcomes,
        events=counts
    )
    logger.info(f"Extraction score: {score.model_dump()} event_f1={score.event_f1:.4f}")
    return score
