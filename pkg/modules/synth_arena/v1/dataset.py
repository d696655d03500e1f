"""
Synthetic dataset generation: simulate, render and write a labeled round set.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from core.errors import PipelineIOError
from core.minimap import EventKind, Outcome, Team, get_map
from core.round_store import (
    DATASET_FILE,
    EVENTS_FILE,
    FRAMES_DIR,
    ROUNDS_FILE,
    TRUTH_FILE,
    FrameFormat,
    RoundRecord,
    Split,
    assign_splits,
    write_json,
    write_jsonl,
    write_png_stream,
    write_raw_stream
)
from modules.event_fusion.v1 import write_events
from .models import GroundTruth, SimConfig
from .render import render_stream_frame
from .simulator import derive_seed, simulate_round

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.json"

# Round-duration counts of the real tournament rounds, for side-by-side comparison only
REFERENCE_DURATION_COUNTS = [254, 2682, 7966, 10327]
DURATION_BUCKETS = ["0-24", "25-49", "50-74", "75-99"]
ADVANTAGE_WINDOW_S = (25.0, 75.0)


def round_id_for(index: int) -> str:
    return f"r{index:05d}"


def duration_bucket(duration_s: int) -> int:
    """Index into DURATION_BUCKETS; a full 100 s round counts in the last bucket"""
    return min(duration_s, 99) // 25


def event_advantage(truth: GroundTruth, window=ADVANTAGE_WINDOW_S) -> int:
    """
    Attacker minus defender tactical advantage inside the window.

    A team gains one point for each of its skill uses and for each opponent
    footstep it heard.
    """
    lo, hi = window
    score = 0
    for e in truth.events:
        if not lo <= e.timestamp < hi:
            continue
        if e.kind is EventKind.SKILL_USE:
            score += 1 if e.team is Team.ATTACKER else -1
        elif e.kind is EventKind.FOOTSTEP_HEARD:
            score += 1 if e.team is Team.DEFENDER else -1
    return score


def summarize(truths: Sequence[GroundTruth], records: Sequence[RoundRecord]) -> dict:
    """Outcome, split and duration statistics plus the event-advantage win-rate shift"""
    durations = [0] * len(DURATION_BUCKETS)
    for t in truths:
        durations[duration_bucket(t.duration_s)] += 1

    atk_ahead = [t for t in truths if event_advantage(t) > 0]
    def_ahead = [t for t in truths if event_advantage(t) < 0]

    def attacker_rate(group: List[GroundTruth]) -> Optional[float]:
        if not group:
            return None
        return sum(t.outcome is Outcome.ATTACKER_WIN for t in group) / len(group)

    advantaged_wins = (sum(t.outcome is Outcome.ATTACKER_WIN for t in atk_ahead)
                       + sum(t.outcome is Outcome.DEFENDER_WIN for t in def_ahead))
    n_advantaged = len(atk_ahead) + len(def_ahead)
    rate_atk, rate_def = attacker_rate(atk_ahead), attacker_rate(def_ahead)

    end_reasons: Dict[str, int] = {}
    for t in truths:
        end_reasons[t.end_reason] = end_reasons.get(t.end_reason, 0) + 1

    return {
        "n_rounds": len(truths),
        "splits": {s.value: sum(r.split is s for r in records) for s in Split},
        "outcomes": {o.value: sum(t.outcome is o for t in truths) for o in Outcome},
        "end_reasons": dict(sorted(end_reasons.items())),
        "duration_buckets": DURATION_BUCKETS,
        "duration_counts": durations,
        "reference_duration_counts": REFERENCE_DURATION_COUNTS,
        "event_advantage": {
            "window_s": list(ADVANTAGE_WINDOW_S),
            "rounds_with_advantage": n_advantaged,
            "advantaged_team_win_rate": advantaged_wins / n_advantaged if n_advantaged else None,
            "attacker_win_rate_when_ahead": rate_atk,
            "attacker_win_rate_when_behind": rate_def,
            "win_rate_shift": rate_atk - rate_def if rate_atk is not None and rate_def is not None else None
        }
    }


def _write_frames(truth: GroundTruth, round_id: str, frames_dir: Path, frame_format: FrameFormat) -> None:
    map_spec = get_map(truth.map_id)
    frames = (render_stream_frame(truth, i, map_spec).pixels for i in range(truth.stream_frames))
    if frame_format is FrameFormat.PNG:
        write_png_stream(frames_dir / round_id, frames)
    elif frame_format is FrameFormat.RGB:
        write_raw_stream(frames_dir / f"{round_id}.rgb", frames, truth.fps)


def generate_dataset(
    cfg: SimConfig,
    n_rounds: int,
    out_dir: Path,
    frame_format: FrameFormat = FrameFormat.PNG,
    threads: int = 1,
    train_fraction: float = 0.8,
    val_fraction: float = 0.1
) -> List[RoundRecord]:
    """
    Simulate `n_rounds` rounds and write a complete dataset.

    Args:
        cfg: Simulator settings (cfg.seed drives every round seed and the split hash)
        n_rounds: Number of rounds
        out_dir: Dataset directory
        frame_format: png | rgb | none (none re-renders from truth.jsonl when read)
        threads: Worker threads; the output does not depend on it
        train_fraction: Share of rounds in the train split
        val_fraction: Share of rounds in the val split

    Returns:
        Manifest records in round order

    Raises:
        PipelineIOError: out_dir cannot be written
    """
    out_dir = Path(out_dir)
    frame_format = FrameFormat(frame_format)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise PipelineIOError(f"cannot create {out_dir}: {e}")
    frames_dir = out_dir / FRAMES_DIR
    round_ids = [round_id_for(i) for i in range(n_rounds)]
    logger.info(f"=== Generating {n_rounds} rounds (seed {cfg.seed}, frames: {frame_format.value}) ===")

    def build(index: int) -> GroundTruth:
        truth = simulate_round(cfg, derive_seed(cfg.seed, index))
        _write_frames(truth, round_ids[index], frames_dir, frame_format)
        return truth

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        truths = list(pool.map(build, range(n_rounds)))

    splits = assign_splits(round_ids, cfg.seed, train_fraction, val_fraction)
    records = [
        RoundRecord(
            round_id=round_id,
            stream=round_id,
            start_frame=truth.lead_in_frames,
            end_frame=truth.lead_in_frames + truth.n_frames,
            outcome=truth.outcome,
            map=truth.map_id,
            fps=truth.fps,
            split=splits[round_id]
        )
        for round_id, truth in zip(round_ids, truths)
    ]

    write_json(out_dir / DATASET_FILE, {
        "frames_dir": FRAMES_DIR,
        "frame_format": frame_format.value,
        "map": cfg.map_id,
        "fps": cfg.fps,
        "source": "synth",
        "sim": cfg.model_dump(mode="json")
    })
    write_jsonl(out_dir / ROUNDS_FILE, (r.to_record() for r in records))
    write_events(out_dir / EVENTS_FILE, {rid: t.events for rid, t in zip(round_ids, truths)})
    write_jsonl(out_dir / TRUTH_FILE, (t.to_record(rid) for rid, t in zip(round_ids, truths)))
    summary = summarize(truths, records)
    write_json(out_dir / SUMMARY_FILE, summary)
    logger.info(f"Wrote {n_rounds} rounds to {out_dir}: outcomes {summary['outcomes']}, "
                f"durations {summary['duration_counts']}")
    return records
