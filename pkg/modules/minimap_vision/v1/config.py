"""Vision pipeline settings"""
from typing import Optional

from pydantic import BaseModel, Field


class VisionConfig(BaseModel):
    """Thresholds of the extraction pipeline; radius defaults to the map's audible radius"""
    ncc_threshold: float = Field(default=0.8, gt=0.0, le=1.0)
    nms_radius: int = Field(default=9, gt=0)
    median_width: int = Field(default=5, gt=0)
    debounce_s: float = Field(default=1.0, gt=0.0)
    v_min: float = Field(default=1.0, ge=0.0)
    speed_window: int = Field(default=4, gt=0)
    max_gap_s: float = Field(default=2.0, ge=0.0)
    round_cap_s: int = Field(default=100, gt=0)
    fps: int = Field(default=8, gt=0)
    audible_radius: Optional[float] = Field(default=None, gt=0.0)

    @property
    def debounce_frames(self) -> int:
        return max(1, int(round(self.debounce_s * self.fps)))
