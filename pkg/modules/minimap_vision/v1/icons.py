"""Icon detection on the playfield: agents, skill effects and the spike"""
import logging
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.minimap import AGENT_NAMES, ICON_SIZE, MapSpec, ROSTER, Team, as_pixels, to_grayscale
from core.minimap.glyphs import agent_icon, effect_icon, spike_icon
from .ncc import ncc_scores

logger = logging.getLogger(__name__)

ICON_HALF = ICON_SIZE // 2


class IconKind(str, Enum):
    AGENT = "agent"
    EFFECT = "effect"
    SPIKE = "spike"


class Detection(BaseModel):
    """One detected icon; x, y is the icon centre in frame pixels"""
    model_config = ConfigDict(frozen=True)

    kind: IconKind
    team: Optional[Team] = None
    agent: Optional[str] = None
    x: int
    y: int
    score: float


class IconTemplates:
    """Grayscale roster templates: one agent and one effect icon per agent, plus the spike"""

    def __init__(self):
        self.labels: List[Tuple[IconKind, Optional[str]]] = []
        images = []
        for agent in AGENT_NAMES:
            self.labels.append((IconKind.AGENT, agent))
            images.append(to_grayscale(agent_icon(agent)))
        for agent in AGENT_NAMES:
            self.labels.append((IconKind.EFFECT, agent))
            images.append(to_grayscale(effect_icon(agent)))
        self.labels.append((IconKind.SPIKE, None))
        images.append(to_grayscale(spike_icon()))
        self.images = images

    def __len__(self) -> int:
        return len(self.labels)


# Singleton instance
_templates: Optional[IconTemplates] = None


def get_icon_templates() -> IconTemplates:
    """Get or create IconTemplates singleton"""
    global _templates
    if _templates is None:
        _templates = IconTemplates()
    return _templates


def detect_icons(
    frame,
    map_spec: MapSpec,
    roster_templates: Optional[IconTemplates] = None,
    threshold: float = 0.8,
    nms_radius: int = ICON_SIZE
) -> List[Detection]:
    """
    Scan the playfield with every roster template and keep local maxima.

    Candidates at or above `threshold` are taken in order of decreasing score;
    a candidate closer than `nms_radius` (Chebyshev) to a kept one is dropped.

    Args:
        frame: FrameImage or uint8 [H, W, 3]
        map_spec: Map whose playfield is scanned
        roster_templates: Templates (built-in roster when None)
        threshold: Minimum NCC
        nms_radius: Suppression radius in px

    Returns:
        Detections sorted by (kind, agent, y, x)
    """
    templates = roster_templates if roster_templates is not None else get_icon_templates()
    gray = to_grayscale(as_pixels(frame))[map_spec.playfield_y0:, :]
    scores, _ = ncc_scores(templates.images, gray)

    k_idx, y_idx, x_idx = np.nonzero(scores >= threshold)
    if k_idx.size == 0:
        return []
    values = scores[k_idx, y_idx, x_idx]
    order = np.lexsort((x_idx, y_idx, k_idx, -values))

    kept: List[Tuple[int, int, int, float]] = []
    for i in order:
        x, y = int(x_idx[i]), int(y_idx[i])
        if any(max(abs(x - kx), abs(y - ky)) < nms_radius for _, kx, ky, _ in kept):
            continue
        kept.append((int(k_idx[i]), x, y, float(values[i])))

    detections = []
    for k, x, y, score in kept:
        kind, agent = templates.labels[k]
        detections.append(Detection(
            kind=kind,
            team=ROSTER[agent] if agent is not None else Team.ATTACKER,
            agent=agent,
            x=x + ICON_HALF,
            y=y + map_spec.playfield_y0 + ICON_HALF,
            score=score
        ))
    return sorted(detections, key=lambda d: (d.kind.value, d.agent or "", d.y, d.x))
