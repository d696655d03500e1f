"""Map registry"""
import json
import logging
from pathlib import Path
from typing import Dict, Optional

from core.errors import PipelineIOError
from .models import Area, MapSpec

logger = logging.getLogger(__name__)

DEFAULT_MAP_ID = "foundry"


def build_default_map() -> MapSpec:
    """
    128x128 minimap: 16-px HUD strip, then six areas (two spawns, two sites,
    mid and a connector) tiling the playfield.
    """
    return MapSpec(
        map_id=DEFAULT_MAP_ID,
        width=128,
        height=128,
        playfield_y0=16,
        areas=[
            Area(name="def_spawn", x0=0, y0=16, x1=128, y1=36),
            Area(name="site_a", x0=0, y0=36, x1=48, y1=76),
            Area(name="mid", x0=48, y0=36, x1=80, y1=76),
            Area(name="site_b", x0=80, y0=36, x1=128, y1=76),
            Area(name="connector", x0=0, y0=76, x1=128, y1=104),
            Area(name="atk_spawn", x0=0, y0=104, x1=128, y1=128),
        ],
        links=[
            ("def_spawn", "site_a"),
            ("def_spawn", "mid"),
            ("def_spawn", "site_b"),
            ("site_a", "mid"),
            ("mid", "site_b"),
            ("site_a", "connector"),
            ("mid", "connector"),
            ("site_b", "connector"),
            ("connector", "atk_spawn"),
        ],
        timer_anchors=[(2, 3), (8, 3), (14, 3), (20, 3)],
        banner_anchor=(76, 4),
        audible_radius=24.0,
    )


class MapRegistry:
    """Maps by id; the built-in map is always present, more can be loaded from JSON"""

    def __init__(self):
        default = build_default_map()
        self._maps: Dict[str, MapSpec] = {default.map_id: default}

    def register(self, map_spec: MapSpec) -> None:
        self._maps[map_spec.map_id] = map_spec
        logger.info(f"Registered map: {map_spec.map_id}")

    def load_file(self, path: Path) -> MapSpec:
        try:
            with open(path, "r", encoding="utf-8") as f:
                payload = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise PipelineIOError(f"cannot read map file {path}: {e}")
        map_spec = MapSpec(**payload)
        self.register(map_spec)
        return map_spec

    def get(self, map_id: str = DEFAULT_MAP_ID) -> MapSpec:
        if map_id not in self._maps:
            raise KeyError(f"Unknown map: {map_id}")
        return self._maps[map_id]


# Singleton instance
_registry: Optional[MapRegistry] = None


def get_map_registry() -> MapRegistry:
    """Get or create MapRegistry singleton"""
    global _registry
    if _registry is None:
        _registry = MapRegistry()
    return _registry


def get_map(map_id: str = DEFAULT_MAP_ID) -> MapSpec:
    return get_map_registry().get(map_id)
