"""Minimap renderer: a pure function of the round state at one frame"""
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from core.minimap import ICON_SIZE, FrameImage, MapSpec, Outcome, format_timer, get_map
from core.minimap.glyphs import (
    BOUNDARY,
    DIGIT_WIDTH,
    HUD_BACKGROUND,
    agent_icon,
    banner_bitmap,
    digit_bitmap,
    effect_icon,
    spike_icon
)
from .models import GroundTruth

PLAYFIELD = (62, 68, 62)
ICON_HALF = ICON_SIZE // 2
ROUND_TIMER_S = 100

Position = Tuple[int, int]


_base_layers: Dict[str, np.ndarray] = {}


def _base_layer(map_spec: MapSpec) -> np.ndarray:
    """HUD strip, playfield and 1-px area boundaries"""
    key = map_spec.spec_hash()
    if key in _base_layers:
        return _base_layers[key]
    frame = np.empty((map_spec.height, map_spec.width, 3), dtype=np.uint8)
    frame[:map_spec.playfield_y0] = HUD_BACKGROUND
    frame[map_spec.playfield_y0:] = PLAYFIELD
    for area in map_spec.areas:
        if area.y0 > map_spec.playfield_y0:
            frame[area.y0, area.x0:area.x1] = BOUNDARY
        if area.x0 > 0:
            frame[area.y0:area.y1, area.x0] = BOUNDARY
    frame.setflags(write=False)
    _base_layers[key] = frame
    return frame


def _paste(frame: np.ndarray, icon: np.ndarray, cx: int, cy: int) -> None:
    frame[cy - ICON_HALF:cy + ICON_HALF + 1, cx - ICON_HALF:cx + ICON_HALF + 1] = icon


def icon_fits(map_spec: MapSpec, x: int, y: int) -> bool:
    """Icon centred at (x, y) lies fully inside the playfield"""
    return (ICON_HALF <= x < map_spec.width - ICON_HALF
            and map_spec.playfield_y0 + ICON_HALF <= y < map_spec.height - ICON_HALF)


def render_frame(
    positions: Dict[str, Position],
    timer: Optional[int],
    map_spec: MapSpec,
    effects: Sequence[Tuple[str, int, int]] = (),
    spike: Optional[Position] = None,
    banner: Optional[Outcome] = None,
    timestamp: float = 0.0
) -> FrameImage:
    """
    Draw one minimap frame.

    Args:
        positions: Agent -> icon centre
        timer: Remaining seconds, or None for no timer
        map_spec: Map layout
        effects: Active skill effects as (agent, x, y)
        spike: Planted spike centre
        banner: Outcome banner to show
        timestamp: Stamped on the FrameImage

    Returns:
        FrameImage of map_spec's size
    """
    frame = _base_layer(map_spec).copy()
    for agent, x, y in effects:
        _paste(frame, effect_icon(agent), x, y)
    if spike is not None:
        _paste(frame, spike_icon(), *spike)
    for agent in sorted(positions):
        _paste(frame, agent_icon(agent), *positions[agent])
    if timer is not None:
        text = format_timer(timer)
        for ch, (ax, ay) in zip(text, map_spec.timer_anchors):
            glyph = digit_bitmap(ch)
            frame[ay:ay + glyph.shape[0], ax:ax + DIGIT_WIDTH] = glyph
    if banner is not None:
        bx, by = map_spec.banner_anchor
        bitmap = banner_bitmap(banner)
        frame[by:by + bitmap.shape[0], bx:bx + bitmap.shape[1]] = bitmap
    return FrameImage(width=map_spec.width, height=map_spec.height, pixels=frame, timestamp=timestamp)


def timer_at(frame: int, fps: int) -> int:
    """Seconds shown at round frame `frame`; every round starts at 100"""
    return ROUND_TIMER_S - frame // fps


def render_stream_frame(truth: GroundTruth, index: int, map_spec: Optional[MapSpec] = None) -> FrameImage:
    """
    Frame `index` of a round's stream: lead-in without HUD, round frames with
    the timer, then outcome-banner frames frozen on the last round positions.
    """
    map_spec = map_spec or get_map(truth.map_id)
    timestamp = index / truth.fps
    frame = index - truth.lead_in_frames
    if frame < 0:
        return render_frame({}, None, map_spec, timestamp=timestamp)
    spike = None
    if truth.spike is not None and frame >= truth.spike.plant_frame:
        spike = (truth.spike.x, truth.spike.y)
    if frame >= truth.n_frames:
        last = truth.n_frames - 1
        return render_frame(truth.positions_at(last), None, map_spec, spike=spike,
                            banner=truth.outcome, timestamp=timestamp)
    effects = [(e.agent, e.x, e.y) for e in truth.effects if e.active(frame)]
    return render_frame(truth.positions_at(frame), timer_at(frame, truth.fps), map_spec,
                        effects=effects, spike=spike, timestamp=timestamp)


def truth_renderer(truth_record: dict) -> Callable[[int], np.ndarray]:
    """Frame factory over one truth.jsonl record (datasets stored without frames)"""
    truth = GroundTruth.from_record(truth_record)
    map_spec = get_map(truth.map_id)

    def frame(index: int) -> np.ndarray:
        return render_stream_frame(truth, index, map_spec).pixels

    return frame
