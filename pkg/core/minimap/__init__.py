"""Minimap vocabulary: map layout, teams, agents, event labels, glyphs and shared event rules"""
from .models import (
    Area,
    EventKind,
    EventLabel,
    FrameImage,
    MapSpec,
    Outcome,
    RoundBoundary,
    Team,
    as_pixels,
    to_grayscale
)
from .glyphs import AGENT_NAMES, ROSTER, ICON_SIZE, format_timer
from .service import DEFAULT_MAP_ID, build_default_map, get_map, get_map_registry
from .rules import footstep_events, nearest_agent, resolve_area, rising_edges, sort_events

__all__ = [
    "Area",
    "EventKind",
    "EventLabel",
    "FrameImage",
    "MapSpec",
    "Outcome",
    "RoundBoundary",
    "Team",
    "as_pixels",
    "to_grayscale",
    "AGENT_NAMES",
    "ROSTER",
    "ICON_SIZE",
    "format_timer",
    "DEFAULT_MAP_ID",
    "build_default_map",
    "get_map",
    "get_map_registry",
    "footstep_events",
    "nearest_agent",
    "resolve_area",
    "rising_edges",
    "sort_events"
]
