"""
Event rules shared by the simulator (ground truth) and the vision stage
(inference from detected positions), so both label the same situations.
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

from core.errors import UnmappedPositionError
from .glyphs import ROSTER
from .models import Area, EventKind, EventLabel, MapSpec

logger = logging.getLogger(__name__)

Position = Tuple[int, int]
Track = Sequence[Optional[Position]]


def resolve_area(map_spec: MapSpec, x: float, y: float) -> Area:
    """Containing area, falling back to the nearest one for unmapped positions"""
    try:
        return map_spec.locate(x, y)
    except UnmappedPositionError as e:
        area = map_spec.nearest_area(x, y)
        logger.warning(f"{e}; assigned to nearest area {area.name}")
        return area


def footstep_events(
    tracks: Dict[str, Track],
    map_spec: MapSpec,
    fps: int,
    radius: float,
    v_min: float,
    speed_window: int = 4,
    start_frame: int = 0,
    end_frame: Optional[int] = None,
    debounce_frames: Optional[int] = None
) -> List[EventLabel]:
    """
    footstep_heard events from per-frame agent positions.

    An agent is heard at frame f when it moved at least `v_min` px/frame,
    measured over the last `speed_window` frames, and an opposing agent lies
    within `radius` px. At most one event per agent per debounce window (a whole second by default).

    Args:
        tracks: agent name -> position per frame (None when absent)
        map_spec: Map used to name the area of the heard agent
        fps: Frames per second of the tracks
        radius: Audible radius in px
        v_min: Minimum speed in px/frame
        speed_window: Frames over which speed is measured
        start_frame: First frame to evaluate
        end_frame: Evaluate frames before this one (all frames when None)
        debounce_frames: Length of the one-event-per-agent window (one second when None)

    Returns:
        Events sorted by (timestamp, agent)
    """
    if not tracks:
        return []
    n_frames = max(len(t) for t in tracks.values())
    if end_frame is not None:
        n_frames = min(n_frames, end_frame)
    debounce = debounce_frames or fps
    emitted = set()
    events: List[EventLabel] = []

    for f in range(max(speed_window, start_frame), n_frames):
        for agent in sorted(tracks):
            track = tracks[agent]
            if f >= len(track) or track[f] is None or track[f - speed_window] is None:
                continue
            (x, y), (px, py) = track[f], track[f - speed_window]
            speed = math.hypot(x - px, y - py) / speed_window
            if speed < v_min:
                continue
            bucket = (agent, f // debounce)
            if bucket in emitted:
                continue
            team = ROSTER[agent]
            heard = False
            for other, other_track in tracks.items():
                if ROSTER[other] is team or f >= len(other_track) or other_track[f] is None:
                    continue
                ox, oy = other_track[f]
                if math.hypot(x - ox, y - oy) <= radius:
                    heard = True
                    break
            if not heard:
                continue
            emitted.add(bucket)
            events.append(EventLabel(
                timestamp=f / fps,
                team=team,
                agent=agent,
                area=resolve_area(map_spec, x, y).name,
                kind=EventKind.FOOTSTEP_HEARD
            ))
    return events


def rising_edges(presence: Sequence[bool]) -> List[int]:
    """Frames where presence switches on (frame 0 counts when present)"""
    edges = []
    previous = False
    for f, present in enumerate(presence):
        if present and not previous:
            edges.append(f)
        previous = present
    return edges


def nearest_agent(
    position: Position,
    candidates: Dict[str, Position]
) -> Optional[str]:
    """Closest candidate agent, ties broken by name"""
    best = None
    for name in sorted(candidates):
        cx, cy = candidates[name]
        d = math.hypot(cx - position[0], cy - position[1])
        if best is None or d < best[0]:
            best = (d, name)
    return None if best is None else best[1]


def sort_events(events: Sequence[EventLabel]) -> List[EventLabel]:
    return sorted(events, key=lambda e: (e.timestamp, e.kind.value, e.agent))
