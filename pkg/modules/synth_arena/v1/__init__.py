"""Synth arena v1: round simulator, minimap renderer and dataset generator"""
from .models import DuelRecord, EffectSpan, GroundTruth, SimConfig, SpikeState
from .simulator import RoundSimulator, derive_seed, simulate_round
from .render import icon_fits, render_frame, render_stream_frame, timer_at, truth_renderer
from .dataset import (
    DURATION_BUCKETS,
    REFERENCE_DURATION_COUNTS,
    SUMMARY_FILE,
    duration_bucket,
    event_advantage,
    generate_dataset,
    round_id_for,
    summarize
)

__all__ = [
    "DuelRecord",
    "EffectSpan",
    "GroundTruth",
    "SimConfig",
    "SpikeState",
    "RoundSimulator",
    "derive_seed",
    "simulate_round",
    "icon_fits",
    "render_frame",
    "render_stream_frame",
    "timer_at",
    "truth_renderer",
    "DURATION_BUCKETS",
    "REFERENCE_DURATION_COUNTS",
    "SUMMARY_FILE",
    "duration_bucket",
    "event_advantage",
    "generate_dataset",
    "round_id_for",
    "summarize"
]
