"""Tactical events from per-frame icon detections of one round"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from core.minimap import (
    EventKind,
    EventLabel,
    MapSpec,
    ROSTER,
    Team,
    footstep_events,
    nearest_agent,
    resolve_area,
    rising_edges,
    sort_events
)
from .config import VisionConfig
from .icons import Detection, IconKind

logger = logging.getLogger(__name__)


def agent_tracks(detections: Sequence[Sequence[Detection]]) -> Dict[str, List[Optional[Tuple[int, int]]]]:
    """Agent name -> centre per frame (None where not detected)"""
    tracks: Dict[str, List[Optional[Tuple[int, int]]]] = {}
    n_frames = len(detections)
    for f, frame_detections in enumerate(detections):
        for d in frame_detections:
            if d.kind is not IconKind.AGENT:
                continue
            track = tracks.setdefault(d.agent, [None] * n_frames)
            track[f] = (d.x, d.y)
    return tracks


def infer_events(
    detections: Sequence[Sequence[Detection]],
    map_spec: MapSpec,
    cfg: Optional[VisionConfig] = None
) -> List[EventLabel]:
    """
    Events of one round from its detections, frame 0 being the round start.

    footstep_heard: a moving agent (>= v_min px/frame) within the audible radius
    of an opponent, one per agent per debounce window. skill_use: first frame of
    each appearance of an agent's effect icon. spike_plant: first frame of the
    spike icon, credited to the nearest attacker.

    Returns:
        Events sorted by time
    """
    cfg = cfg or VisionConfig()
    radius = cfg.audible_radius or map_spec.audible_radius
    events = footstep_events(
        agent_tracks(detections),
        map_spec,
        fps=cfg.fps,
        radius=radius,
        v_min=cfg.v_min,
        speed_window=cfg.speed_window,
        debounce_frames=cfg.debounce_frames
    )

    effect_agents = sorted({d.agent for frame in detections for d in frame if d.kind is IconKind.EFFECT})
    for agent in effect_agents:
        positions = [
            next(((d.x, d.y) for d in frame if d.kind is IconKind.EFFECT and d.agent == agent), None)
            for frame in detections
        ]
        for f in rising_edges([p is not None for p in positions]):
            x, y = positions[f]
            events.append(EventLabel(
                timestamp=f / cfg.fps,
                team=ROSTER[agent],
                agent=agent,
                area=resolve_area(map_spec, x, y).name,
                kind=EventKind.SKILL_USE
            ))

    spikes = [next(((d.x, d.y) for d in frame if d.kind is IconKind.SPIKE), None) for frame in detections]
    for f in rising_edges([p is not None for p in spikes]):
        attackers = {
            d.agent: (d.x, d.y) for d in detections[f]
            if d.kind is IconKind.AGENT and ROSTER[d.agent] is Team.ATTACKER
        }
        planter = nearest_agent(spikes[f], attackers)
        if planter is None:
            logger.warning(f"Spike appeared at frame {f} with no attacker on the map; event dropped")
            continue
        events.append(EventLabel(
            timestamp=f / cfg.fps,
            team=Team.ATTACKER,
            agent=planter,
            area=resolve_area(map_spec, *spikes[f]).name,
            kind=EventKind.SPIKE_PLANT
        ))

    return sort_events(events)
