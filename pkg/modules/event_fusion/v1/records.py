"""Events JSONL: one record per line, sorted by t (and grouped by round when round ids are present)"""
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence

from core.errors import PipelineIOError
from core.minimap import EventLabel, sort_events

logger = logging.getLogger(__name__)


def write_events(path: Path, events_by_round: Dict[str, Sequence[EventLabel]]) -> int:
    """
    Write events for several rounds, rounds in id order, events sorted by time.

    Returns:
        Number of records written
    """
    count = 0
    try:
        with open(path, "w", encoding="utf-8") as f:
            for round_id in sorted(events_by_round):
                for event in sort_events(events_by_round[round_id]):
                    f.write(json.dumps({"round_id": round_id, **event.to_record()}) + "\n")
                    count += 1
    except OSError as e:
        raise PipelineIOError(f"cannot write events to {path}: {e}")
    return count


def write_round_events(path: Path, events: Sequence[EventLabel]) -> None:
    """Single-round events file without round ids"""
    try:
        with open(path, "w", encoding="utf-8") as f:
            for event in sort_events(events):
                f.write(json.dumps(event.to_record()) + "\n")
    except OSError as e:
        raise PipelineIOError(f"cannot write events to {path}: {e}")


def read_events(path: Path) -> Dict[str, List[EventLabel]]:
    """
    Events grouped by round id; records without a round id land under "".

    Raises:
        PipelineIOError: missing file or malformed record
    """
    grouped: Dict[str, List[EventLabel]] = defaultdict(list)
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    grouped[str(record.get("round_id", ""))].append(EventLabel.from_record(record))
                except (ValueError, KeyError) as e:
                    raise PipelineIOError(f"{path}:{line_no}: malformed event record: {e}")
    except OSError as e:
        raise PipelineIOError(f"cannot read events from {path}: {e}")
    logger.debug(f"Read events for {len(grouped)} rounds from {path}")
    return {round_id: sort_events(events) for round_id, events in grouped.items()}
