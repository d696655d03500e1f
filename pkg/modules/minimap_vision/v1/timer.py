"""Timer OCR and outcome banner reading from the HUD strip"""
import logging
from typing import Optional

import numpy as np

from core.minimap import MapSpec, Outcome, as_pixels, to_grayscale
from core.minimap.glyphs import BANNER_HEIGHT, BANNER_WIDTH, DIGIT_HEIGHT, DIGIT_WIDTH, banner_bitmap, digit_bitmap
from .ncc import ncc_at

logger = logging.getLogger(__name__)

DIGITS = "0123456789"
_DIGIT_TEMPLATES = [to_grayscale(digit_bitmap(ch)) for ch in DIGITS]
_COLON_TEMPLATE = to_grayscale(digit_bitmap(":"))
_BANNER_TEMPLATES = {
    Outcome.ATTACKER_WIN: to_grayscale(banner_bitmap(Outcome.ATTACKER_WIN)),
    Outcome.DEFENDER_WIN: to_grayscale(banner_bitmap(Outcome.DEFENDER_WIN)),
}


def _cell(gray: np.ndarray, x: int, y: int, width: int, height: int) -> Optional[np.ndarray]:
    if y < 0 or x < 0 or y + height > gray.shape[0] or x + width > gray.shape[1]:
        return None
    return gray[y:y + height, x:x + width]


def read_timer(frame, map_spec: MapSpec, threshold: float = 0.8) -> Optional[int]:
    """
    Remaining round time from the M:SS digits at the map's timer anchors.

    Args:
        frame: FrameImage or uint8 [H, W, 3]
        map_spec: Map with four anchors (minute, colon, tens, units)
        threshold: Minimum NCC every glyph must reach

    Returns:
        Seconds, or None when any glyph is below threshold (no timer shown)
    """
    gray = to_grayscale(as_pixels(frame))
    anchors = map_spec.timer_anchors
    if len(anchors) != 4:
        raise ValueError(f"map {map_spec.map_id} needs 4 timer anchors, has {len(anchors)}")

    values = []
    for position, (x, y) in enumerate(anchors):
        cell = _cell(gray, x, y, DIGIT_WIDTH, DIGIT_HEIGHT)
        if cell is None:
            return None
        if position == 1:
            if ncc_at([_COLON_TEMPLATE], cell)[0] < threshold:
                return None
            continue
        scores = ncc_at(_DIGIT_TEMPLATES, cell)
        best = int(np.argmax(scores))
        if scores[best] < threshold:
            return None
        values.append(best)

    minutes, tens, units = values
    if tens >= 6:
        return None
    return minutes * 60 + tens * 10 + units


def detect_banner(frame, map_spec: MapSpec, threshold: float = 0.8) -> Optional[Outcome]:
    """Outcome shown by the end-of-round banner at the banner anchor, if any"""
    gray = to_grayscale(as_pixels(frame))
    x, y = map_spec.banner_anchor
    cell = _cell(gray, x, y, BANNER_WIDTH, BANNER_HEIGHT)
    if cell is None:
        return None
    outcomes = list(_BANNER_TEMPLATES)
    scores = ncc_at([_BANNER_TEMPLATES[o] for o in outcomes], cell)
    best = int(np.argmax(scores))
    return outcomes[best] if scores[best] >= threshold else None
