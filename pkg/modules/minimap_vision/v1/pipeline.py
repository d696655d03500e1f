"""
Pixels-only extraction: frame streams -> rounds manifest + events.

Per-frame work (timer, banner, icons) fans out over a thread pool; segmentation
and event inference run sequentially over the ordered results.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from core.minimap import EventLabel, MapSpec, Outcome, RoundBoundary
from core.round_store import (
    DATASET_FILE,
    EVENTS_FILE,
    ROUNDS_FILE,
    RoundRecord,
    assign_splits,
    list_streams,
    open_stream,
    write_json,
    write_jsonl
)
from modules.event_fusion.v1 import write_events
from .config import VisionConfig
from .events import infer_events
from .icons import Detection, detect_icons, get_icon_templates
from .segment import segment_rounds
from .timer import detect_banner, read_timer

logger = logging.getLogger(__name__)


class StreamExtraction(BaseModel):
    """Rounds found in one stream and the events of each"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rounds: List[RoundBoundary]
    events: List[List[EventLabel]]


def _hud(args) -> Tuple[Optional[int], Optional[Outcome]]:
    source, index, map_spec, threshold = args
    frame = source.frame(index)
    return read_timer(frame, map_spec, threshold), detect_banner(frame, map_spec, threshold)


def _icons(args) -> List[Detection]:
    source, index, map_spec, cfg = args
    return detect_icons(source.frame(index), map_spec, get_icon_templates(), cfg.ncc_threshold, cfg.nms_radius)


def extract_stream(source, map_spec: MapSpec, cfg: Optional[VisionConfig] = None, threads: int = 1) -> StreamExtraction:
    """
    Segment one frame stream into rounds and infer each round's events.

    Args:
        source: Frame source with `n_frames` and `frame(i)`
        map_spec: Map drawn in the stream
        cfg: Vision settings
        threads: Worker threads for per-frame work

    Returns:
        StreamExtraction with round-relative event timestamps
    """
    cfg = cfg or VisionConfig()
    n = source.n_frames
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        hud = list(pool.map(_hud, [(source, i, map_spec, cfg.ncc_threshold) for i in range(n)]))
        rounds = segment_rounds([r for r, _ in hud], [b for _, b in hud], cfg, map_spec.map_id)
        events = []
        for boundary in rounds:
            frames = range(boundary.start_frame, boundary.end_frame)
            detections = list(pool.map(_icons, [(source, i, map_spec, cfg) for i in frames]))
            events.append(infer_events(detections, map_spec, cfg))
    logger.info(f"Extracted {len(rounds)} rounds, {sum(len(e) for e in events)} events from {n} frames")
    return StreamExtraction(rounds=rounds, events=events)


def extract_dataset(
    frames_dir: Path,
    out_dir: Path,
    map_spec: MapSpec,
    cfg: Optional[VisionConfig] = None,
    threads: int = 1,
    seed: int = 0,
    train_fraction: float = 0.8,
    val_fraction: float = 0.1
) -> List[RoundRecord]:
    """
    Run extraction over every stream under `frames_dir` and write rounds.jsonl
    and events.jsonl to `out_dir`. A stream holding one round keeps the stream
    name as round id; further rounds get a `_k` suffix.
    """
    cfg = cfg or VisionConfig()
    records: List[RoundRecord] = []
    events_by_round: Dict[str, List[EventLabel]] = {}
    for path in list_streams(frames_dir):
        source = open_stream(path, cfg.fps)
        result = extract_stream(source, map_spec, cfg, threads)
        for k, (boundary, events) in enumerate(zip(result.rounds, result.events)):
            round_id = path.stem if len(result.rounds) == 1 else f"{path.stem}_{k}"
            records.append(RoundRecord(
                round_id=round_id,
                stream=path.stem,
                start_frame=boundary.start_frame,
                end_frame=boundary.end_frame,
                outcome=boundary.outcome,
                map=boundary.map_id,
                fps=cfg.fps
            ))
            events_by_round[round_id] = events

    splits = assign_splits([r.round_id for r in records], seed, train_fraction, val_fraction)
    records = [r.model_copy(update={"split": splits[r.round_id]}) for r in records]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / DATASET_FILE, {
        "frames_dir": str(Path(frames_dir).resolve()),
        "map": map_spec.map_id,
        "fps": cfg.fps,
        "source": "extract"
    })
    write_jsonl(out_dir / ROUNDS_FILE, (r.to_record() for r in records))
    write_events(out_dir / EVENTS_FILE, events_by_round)
    logger.info(f"Wrote {len(records)} extracted rounds to {out_dir}")
    return records
