"""Minimap vision v1: pixels-only extraction of rounds and tactical events"""
from .config import VisionConfig
from .ncc import NCCMatch, ncc_at, ncc_map, ncc_match, ncc_scores, normalized_templates
from .timer import detect_banner, read_timer
from .icons import Detection, IconKind, IconTemplates, detect_icons, get_icon_templates
from .events import agent_tracks, infer_events
from .segment import SegmentState, median_filter, segment_rounds
from .pipeline import StreamExtraction, extract_dataset, extract_stream
from .scoring import ExtractionScore, MatchCounts, match_detections, match_events, score_extraction

__all__ = [
    "VisionConfig",
    "NCCMatch",
    "ncc_at",
    "ncc_map",
    "ncc_match",
    "ncc_scores",
    "normalized_templates",
    "detect_banner",
    "read_timer",
    "Detection",
    "IconKind",
    "IconTemplates",
    "detect_icons",
    "get_icon_templates",
    "agent_tracks",
    "infer_events",
    "SegmentState",
    "median_filter",
    "segment_rounds",
    "StreamExtraction",
    "extract_dataset",
    "extract_stream",
    "ExtractionScore",
    "MatchCounts",
    "match_detections",
    "match_events",
    "score_extraction"
]
