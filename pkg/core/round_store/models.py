"""Dataset records"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.minimap import Outcome


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class FrameFormat(str, Enum):
    """How a dataset stores its frames; NONE re-renders them from truth.jsonl"""
    PNG = "png"
    RGB = "rgb"
    NONE = "none"


class StreamMeta(BaseModel):
    """JSON sidecar of a raw RGB24 stream"""
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    fps: int = Field(gt=0)


class RoundRecord(BaseModel):
    """
    One line of rounds.jsonl.

    `stream` names the frame stream holding the round; the round occupies
    stream frames [start_frame, end_frame).
    """
    model_config = ConfigDict(populate_by_name=True)

    round_id: str
    stream: str
    start_frame: int = Field(ge=0)
    end_frame: int
    outcome: Outcome
    map_id: str = Field(alias="map")
    fps: int = 8
    split: Optional[Split] = None

    @model_validator(mode="after")
    def _ordered(self):
        if self.end_frame <= self.start_frame:
            raise ValueError(f"round {self.round_id}: end_frame must follow start_frame")
        return self

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame

    @property
    def duration_s(self) -> int:
        """Whole seconds with at least one frame"""
        return max(1, -(-self.n_frames // self.fps))

    def to_record(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)
