"""Round segmentation from per-frame timer readings and banner detections"""
import logging
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from core.minimap import DEFAULT_MAP_ID, Outcome, RoundBoundary
from .config import VisionConfig

logger = logging.getLogger(__name__)

ROUND_START_S = 100


class SegmentState(str, Enum):
    IDLE = "idle"
    IN_ROUND = "in_round"


def median_filter(readings: Sequence[Optional[int]], width: int = 5) -> List[Optional[int]]:
    """
    Sliding median over `width` frames.

    A window yields None when most of its frames have no reading; otherwise the
    lower median of the readings present.
    """
    half = width // 2
    out: List[Optional[int]] = []
    for f in range(len(readings)):
        window = [r for r in readings[max(0, f - half):f + half + 1] if r is not None]
        if 2 * len(window) <= width:
            out.append(None)
            continue
        out.append(int(np.sort(window)[(len(window) - 1) // 2]))
    return out


def segment_rounds(
    readings: Sequence[Optional[int]],
    banners: Optional[Sequence[Optional[Outcome]]] = None,
    cfg: Optional[VisionConfig] = None,
    map_id: str = DEFAULT_MAP_ID
) -> List[RoundBoundary]:
    """
    Idle -> InRound when the filtered timer shows 100 s after no timer (or a
    lower reading); InRound ends at the first banner frame, at a 0 reading or at
    a reset to 100. Spans with a timer gap over `max_gap_s`, spans longer than
    the round cap and spans ended without a known outcome are dropped.

    Args:
        readings: Raw per-frame timer values (None = no timer)
        banners: Per-frame banner outcome (None = no banner)
        cfg: Vision settings (filter width, gap limit, cap, fps)
        map_id: Map id stamped on the boundaries

    Returns:
        Sorted, disjoint boundaries; end_frame is exclusive
    """
    cfg = cfg or VisionConfig()
    banners = list(banners) if banners is not None else [None] * len(readings)
    filtered = median_filter(readings, cfg.median_width)
    max_gap = cfg.max_gap_s * cfg.fps
    max_len = cfg.round_cap_s * cfg.fps

    rounds: List[RoundBoundary] = []
    state = SegmentState.IDLE
    start = 0
    gap = longest_gap = 0
    previous: Optional[int] = None

    def close(end: int, outcome: Optional[Outcome], reason: str) -> None:
        if outcome is None:
            logger.warning(f"Dropped round span [{start}, {end}): ended by {reason} with unknown outcome")
        elif longest_gap > max_gap:
            logger.warning(f"Dropped round span [{start}, {end}): {longest_gap} frames without a timer")
        elif end - start > max_len:
            logger.warning(f"Dropped round span [{start}, {end}): longer than {cfg.round_cap_s} s")
        else:
            rounds.append(RoundBoundary(start_frame=start, end_frame=end, outcome=outcome, map_id=map_id))

    for f, reading in enumerate(filtered):
        if state is SegmentState.IN_ROUND:
            if banners[f] is not None:
                close(f, banners[f], "banner")
                state = SegmentState.IDLE
            elif reading == 0:
                upcoming = next((b for b in banners[f:f + cfg.fps + 1] if b is not None), Outcome.DEFENDER_WIN)
                close(f, upcoming, "timer expiry")
                state = SegmentState.IDLE
            elif reading == ROUND_START_S and previous is not None and previous < ROUND_START_S:
                close(f, None, "timer reset")
                start, gap, longest_gap = f, 0, 0
            elif reading is None:
                gap += 1
                longest_gap = max(longest_gap, gap)
            else:
                gap = 0
        elif reading == ROUND_START_S and (previous is None or previous < ROUND_START_S) and banners[f] is None:
            state = SegmentState.IN_ROUND
            start, gap, longest_gap = f, 0, 0
        if reading is not None:
            previous = reading
        elif state is SegmentState.IDLE:
            previous = None

    if state is SegmentState.IN_ROUND:
        logger.warning(f"Dropped round span starting at {start}: stream ended mid-round")
    return rounds
