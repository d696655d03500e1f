"""Simulator configuration and ground-truth records"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.minimap import DEFAULT_MAP_ID, EventLabel, Outcome, Team

Position = Tuple[int, int]


class SimConfig(BaseModel):
    """
    Round simulator settings.

    Duel win probability for the attacker is p0 plus, each scaled to +1/-1/0
    by which side holds the advantage: numbers in the area, an active skill
    effect in the area, and having heard an opponent within info_window_s.
    """
    seed: int = 0
    map_id: str = DEFAULT_MAP_ID
    cap_s: int = Field(default=100, gt=0, le=100)
    fps: int = Field(default=8, gt=0)
    p0: float = Field(default=0.5, gt=0.0, lt=1.0)
    numbers_bonus: float = Field(default=0.1, ge=0.0)
    skill_bonus: float = Field(default=0.15, ge=0.0)
    info_bonus: float = Field(default=0.15, ge=0.0)
    info_window_s: int = Field(default=5, ge=1)
    engage_prob: float = Field(default=0.35, gt=0.0, le=1.0)
    skill_prob: float = Field(default=0.25, ge=0.0, le=1.0)
    skill_cooldown_s: int = Field(default=12, ge=1)
    skill_duration_s: int = Field(default=4, ge=1)
    skill_range: float = Field(default=40.0, gt=0.0)
    run_speed: float = Field(default=2.0, gt=0.0)
    walk_speed: float = Field(default=0.5, gt=0.0)
    walk_prob: float = Field(default=0.3, ge=0.0, le=1.0)
    plant_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    plant_reach: int = Field(default=14, gt=0)
    spike_timer_s: int = Field(default=25, gt=0)
    defuse_s: int = Field(default=7, gt=0)
    v_min: float = Field(default=1.0, ge=0.0)
    speed_window: int = Field(default=4, gt=0)
    min_separation: int = Field(default=10, gt=0)
    stuck_reset_s: int = Field(default=2, gt=0)
    lead_in_frames: int = Field(default=4, ge=0)
    tail_frames: int = Field(default=8, ge=1)

    @model_validator(mode="after")
    def _probabilities(self):
        bonus = self.numbers_bonus + self.skill_bonus + self.info_bonus
        if self.p0 + bonus > 1.0 or self.p0 - bonus < 0.0:
            raise ValueError(f"p0 {self.p0} +/- total bonus {bonus} leaves [0, 1]")
        if self.spike_timer_s >= self.cap_s:
            raise ValueError("spike_timer_s must be shorter than the round cap")
        if self.plant_reach < self.min_separation:
            raise ValueError("plant_reach must be at least min_separation")
        return self

    @property
    def max_bonus(self) -> float:
        return self.numbers_bonus + self.skill_bonus + self.info_bonus


class EffectSpan(BaseModel):
    """Skill-effect icon shown at (x, y) for round frames [start_frame, end_frame)"""
    agent: str
    x: int
    y: int
    start_frame: int
    end_frame: int

    def active(self, frame: int) -> bool:
        return self.start_frame <= frame < self.end_frame


class SpikeState(BaseModel):
    x: int
    y: int
    area: str
    planter: str
    plant_frame: int


class DuelRecord(BaseModel):
    """One resolved duel; p_attacker is the attacker's win probability used"""
    second: int
    area: str
    attacker: str
    defender: str
    winner: Team
    p_attacker: float


class GroundTruth(BaseModel):
    """
    Everything the simulator knows about one round.

    tracks hold one entry per round frame (None once the agent is dead);
    the rendered stream is lead_in_frames without HUD, the round frames,
    then tail_frames showing the outcome banner.
    """
    model_config = ConfigDict(frozen=True)

    seed: int
    map_id: str
    fps: int
    outcome: Outcome
    end_reason: str
    n_frames: int
    lead_in_frames: int
    tail_frames: int
    tracks: Dict[str, List[Optional[Position]]]
    effects: List[EffectSpan]
    spike: Optional[SpikeState] = None
    events: List[EventLabel]
    duels: List[DuelRecord]

    @property
    def duration_s(self) -> int:
        return -(-self.n_frames // self.fps)

    @property
    def stream_frames(self) -> int:
        return self.lead_in_frames + self.n_frames + self.tail_frames

    def positions_at(self, frame: int) -> Dict[str, Position]:
        return {agent: track[frame] for agent, track in self.tracks.items() if track[frame] is not None}

    def to_record(self, round_id: str) -> dict:
        """truth.jsonl line"""
        record = self.model_dump(mode="json", exclude={"events"})
        record["events"] = [e.to_record() for e in self.events]
        record["round_id"] = round_id
        record["duration_s"] = self.duration_s
        record["stream_frames"] = self.stream_frames
        return record

    @classmethod
    def from_record(cls, record: dict) -> "GroundTruth":
        data = {k: v for k, v in record.items() if k in cls.model_fields and k != "events"}
        data["tracks"] = {
            agent: [tuple(p) if p is not None else None for p in track]
            for agent, track in record["tracks"].items()
        }
        data["events"] = [EventLabel.from_record(e) for e in record.get("events", [])]
        return cls(**data)
