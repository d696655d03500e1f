"""Event fusion v1: event embeddings, chunk pooling and projection into the visual token stream"""
from .fusion import (
    CHUNK_FRAMES,
    EventVocab,
    causal_events,
    chunk_occupancy,
    event_ids,
    fuse_batch,
    fuse_for_clip,
    init_fusion_weights,
    pool_chunks,
    pooling_matrix,
    project_and_attach,
    rasterize
)
from .records import read_events, write_events, write_round_events

__all__ = [
    "CHUNK_FRAMES",
    "EventVocab",
    "causal_events",
    "chunk_occupancy",
    "event_ids",
    "fuse_batch",
    "fuse_for_clip",
    "init_fusion_weights",
    "pool_chunks",
    "pooling_matrix",
    "project_and_attach",
    "rasterize",
    "read_events",
    "write_events",
    "write_round_events"
]
