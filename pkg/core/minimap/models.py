"""Minimap domain models"""
import hashlib
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import UnmappedPositionError


class Team(str, Enum):
    """Team sides"""
    ATTACKER = "ATK"
    DEFENDER = "DEF"

    @property
    def opponent(self) -> "Team":
        return Team.DEFENDER if self is Team.ATTACKER else Team.ATTACKER


class EventKind(str, Enum):
    """Tactical event kinds"""
    SKILL_USE = "skill_use"
    FOOTSTEP_HEARD = "footstep_heard"
    SPIKE_PLANT = "spike_plant"


class Outcome(str, Enum):
    """Round outcomes; class index 0 is attacker win, 1 defender win"""
    ATTACKER_WIN = "attacker_win"
    DEFENDER_WIN = "defender_win"

    @property
    def label(self) -> int:
        return 0 if self is Outcome.ATTACKER_WIN else 1

    @classmethod
    def from_label(cls, label: int) -> "Outcome":
        return cls.ATTACKER_WIN if label == 0 else cls.DEFENDER_WIN


class Area(BaseModel):
    """Named map region, half-open pixel rectangle [x0, x1) x [y0, y1)"""
    name: str
    x0: int
    y0: int
    x1: int
    y1: int

    @model_validator(mode="after")
    def _non_empty(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError(f"area {self.name} is empty")
        return self

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def distance(self, x: float, y: float) -> float:
        dx = max(self.x0 - x, 0.0, x - (self.x1 - 1))
        dy = max(self.y0 - y, 0.0, y - (self.y1 - 1))
        return math.hypot(dx, dy)

    @property
    def pixel_area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


class MapSpec(BaseModel):
    """
    Minimap layout: areas, area graph, HUD anchors and the audible radius.

    The frame is `width` x `height`; the HUD strip sits above `playfield_y0`
    and the areas tile the playfield exactly.
    """
    map_id: str
    width: int = 128
    height: int = 128
    playfield_y0: int = 16
    areas: List[Area]
    links: List[Tuple[str, str]] = Field(default_factory=list)
    timer_anchors: List[Tuple[int, int]]
    banner_anchor: Tuple[int, int]
    audible_radius: float = 24.0

    @model_validator(mode="after")
    def _tiles_playfield(self):
        if self.audible_radius <= 0:
            raise ValueError("audible_radius must be positive")
        covered = np.zeros((self.height, self.width), dtype=np.int32)
        for area in self.areas:
            covered[area.y0:area.y1, area.x0:area.x1] += 1
        playfield = covered[self.playfield_y0:, :]
        if playfield.max() > 1:
            raise ValueError("areas overlap")
        if playfield.min() < 1 or covered[:self.playfield_y0, :].any():
            raise ValueError("areas must cover exactly the playfield")
        names = {a.name for a in self.areas}
        for a, b in self.links:
            if a not in names or b not in names:
                raise ValueError(f"link {a}-{b} references an unknown area")
        return self

    @property
    def area_names(self) -> List[str]:
        return [a.name for a in self.areas]

    def area_index(self, name: str) -> int:
        return self.area_names.index(name)

    def area(self, name: str) -> Area:
        return self.areas[self.area_index(name)]

    def area_at(self, x: float, y: float) -> Optional[Area]:
        for area in self.areas:
            if area.contains(x, y):
                return area
        return None

    def locate(self, x: float, y: float) -> Area:
        """
        Area containing a position.

        Raises:
            UnmappedPositionError: position lies outside every area
        """
        area = self.area_at(x, y)
        if area is None:
            raise UnmappedPositionError(f"({x}, {y}) lies outside every area of {self.map_id}")
        return area

    def nearest_area(self, x: float, y: float) -> Area:
        return min(self.areas, key=lambda a: a.distance(x, y))

    def neighbours(self, name: str) -> List[str]:
        out = []
        for a, b in self.links:
            if a == name:
                out.append(b)
            elif b == name:
                out.append(a)
        return sorted(out)

    def spec_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


class EventLabel(BaseModel):
    """One tactical event"""
    model_config = ConfigDict(frozen=True)

    timestamp: float = Field(ge=0.0)
    team: Team
    agent: str
    area: str
    kind: EventKind

    def to_record(self) -> Dict[str, object]:
        """Events JSONL record"""
        return {
            "t": self.timestamp,
            "team": self.team.value,
            "agent": self.agent,
            "area": self.area,
            "kind": self.kind.value
        }

    @classmethod
    def from_record(cls, record: Dict[str, object]) -> "EventLabel":
        return cls(
            timestamp=float(record["t"]),
            team=Team(record["team"]),
            agent=str(record["agent"]),
            area=str(record["area"]),
            kind=EventKind(record["kind"])
        )

    def frame_index(self, fps: int) -> int:
        return int(round(self.timestamp * fps))


class RoundBoundary(BaseModel):
    """One segmented round inside a frame stream"""
    start_frame: int = Field(ge=0)
    end_frame: int
    outcome: Outcome
    map_id: str

    @model_validator(mode="after")
    def _ordered(self):
        if self.end_frame <= self.start_frame:
            raise ValueError("end_frame must follow start_frame")
        return self

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame


class FrameImage(BaseModel):
    """Rendered or decoded frame; pixels are [height, width, 3] uint8, row-major"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    width: int
    height: int
    pixels: np.ndarray
    timestamp: float = 0.0

    @field_validator("pixels")
    @classmethod
    def _rgb24(cls, value: np.ndarray) -> np.ndarray:
        if value.dtype != np.uint8 or value.ndim != 3 or value.shape[2] != 3:
            raise ValueError("pixels must be an [H, W, 3] uint8 array")
        return value

    @model_validator(mode="after")
    def _dims(self):
        if self.pixels.shape[:2] != (self.height, self.width):
            raise ValueError(f"pixels {self.pixels.shape[:2]} do not match {self.height}x{self.width}")
        return self

    def grayscale(self) -> np.ndarray:
        return to_grayscale(self.pixels)


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """ITU-R 601 luma as float64"""
    rgb = rgb.astype(np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def as_pixels(frame) -> np.ndarray:
    """uint8 [H, W, 3] from a FrameImage or an array"""
    return frame.pixels if isinstance(frame, FrameImage) else np.asarray(frame)
