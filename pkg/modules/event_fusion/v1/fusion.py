"""
Early fusion of tactical event labels with visual tokens.

Each event is embedded as E_team + E_agent + E_area + E_kind, scattered onto
a per-frame grid, average-pooled over 8-frame chunks anchored at frame 0 and
linearly projected to the model width. The projected row for a sampled frame
is added to every patch token of that frame.
"""
import logging
import math
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.errors import IndexOutOfRangeError, ShapeMismatchError, UnknownVocabError
from core.minimap import AGENT_NAMES, EventKind, EventLabel, MapSpec, Team
from core.tensor import Tensor, ops, parameter

logger = logging.getLogger(__name__)

CHUNK_FRAMES = 8
PROJECTION_STD = 0.02

TEAM_TABLE = "fusion.team"
AGENT_TABLE = "fusion.agent"
AREA_TABLE = "fusion.area"
KIND_TABLE = "fusion.kind"
PROJ_W = "fusion.proj.w"
PROJ_B = "fusion.proj.b"


class EventVocab(BaseModel):
    """Ordered vocabularies behind the four embedding tables"""
    model_config = ConfigDict(frozen=True)

    teams: Tuple[str, ...]
    agents: Tuple[str, ...]
    areas: Tuple[str, ...]
    kinds: Tuple[str, ...]

    @classmethod
    def for_map(cls, map_spec: MapSpec) -> "EventVocab":
        return cls(
            teams=tuple(t.value for t in Team),
            agents=tuple(AGENT_NAMES),
            areas=tuple(map_spec.area_names),
            kinds=tuple(k.value for k in EventKind)
        )

    @staticmethod
    def _index(table: Tuple[str, ...], value: str, what: str) -> int:
        try:
            return table.index(value)
        except ValueError:
            raise UnknownVocabError(f"unknown {what}: {value}")

    def ids(self, event: EventLabel) -> Tuple[int, int, int, int]:
        """(team, agent, area, kind) row indices"""
        return (
            self._index(self.teams, event.team.value, "team"),
            self._index(self.agents, event.agent, "agent"),
            self._index(self.areas, event.area, "area"),
            self._index(self.kinds, event.kind.value, "kind"),
        )


def init_fusion_weights(d_event: int, d_model: int, vocab: EventVocab, rng: np.random.Generator) -> Dict[str, Tensor]:
    """Embedding tables ~ N(0, 1), projection ~ N(0, 0.02^2), zero bias"""
    return {
        TEAM_TABLE: parameter(rng.normal(0.0, 1.0, size=(len(vocab.teams), d_event))),
        AGENT_TABLE: parameter(rng.normal(0.0, 1.0, size=(len(vocab.agents), d_event))),
        AREA_TABLE: parameter(rng.normal(0.0, 1.0, size=(len(vocab.areas), d_event))),
        KIND_TABLE: parameter(rng.normal(0.0, 1.0, size=(len(vocab.kinds), d_event))),
        PROJ_W: parameter(rng.normal(0.0, PROJECTION_STD, size=(d_event, d_model))),
        PROJ_B: parameter(np.zeros(d_model)),
    }


def n_grid_frames(duration_s: float, fps: int) -> int:
    return max(1, int(math.ceil(duration_s * fps - 1e-9)))


def event_ids(events: Sequence[EventLabel], vocab: EventVocab) -> np.ndarray:
    """[E, 4] vocabulary ids; raises UnknownVocabError"""
    if not events:
        return np.zeros((0, 4), dtype=np.int64)
    return np.array([vocab.ids(e) for e in events], dtype=np.int64)


def rasterize(
    events: Sequence[EventLabel],
    duration_s: float,
    weights: Mapping[str, Tensor],
    vocab: EventVocab,
    fps: int = 8
) -> Tensor:
    """
    Per-frame event grid.

    Args:
        events: Events of one round
        duration_s: Grid length in seconds
        weights: Holds the four embedding tables
        vocab: Vocabulary matching the tables
        fps: Frames per second

    Returns:
        [ceil(duration_s * fps), d_e] with row f = sum of embeddings of events at f

    Raises:
        UnknownVocabError: an event names an agent or area missing from the vocabulary
    """
    n_frames = n_grid_frames(duration_s, fps)
    d_event = weights[TEAM_TABLE].shape[1]
    ids = event_ids(events, vocab)
    if len(ids) == 0:
        return Tensor(np.zeros((n_frames, d_event)))

    embedded = ops.add(
        ops.add(ops.embedding_lookup(weights[TEAM_TABLE], ids[:, 0]),
                ops.embedding_lookup(weights[AGENT_TABLE], ids[:, 1])),
        ops.add(ops.embedding_lookup(weights[AREA_TABLE], ids[:, 2]),
                ops.embedding_lookup(weights[KIND_TABLE], ids[:, 3]))
    )
    frames = np.clip([e.frame_index(fps) for e in events], 0, n_frames - 1)
    scatter = np.zeros((n_frames, len(events)))
    scatter[frames, np.arange(len(events))] = 1.0
    return ops.matmul(scatter, embedded)


def pooling_matrix(n_frames: int, chunk: int = CHUNK_FRAMES) -> np.ndarray:
    """[ceil(F/chunk), F] averaging weights; the last chunk is averaged over its actual length"""
    n_chunks = -(-n_frames // chunk)
    pool = np.zeros((n_chunks, n_frames))
    for c in range(n_chunks):
        lo, hi = c * chunk, min(c * chunk + chunk, n_frames)
        pool[c, lo:hi] = 1.0 / (hi - lo)
    return pool


def pool_chunks(grid: Tensor, chunk: int = CHUNK_FRAMES) -> Tensor:
    """[F, d_e] -> [ceil(F/8), d_e] chunk means"""
    if grid.ndim != 2 or grid.shape[0] < 1:
        raise ShapeMismatchError(f"pool_chunks expects a non-empty [F, d_e] grid, got {grid.shape}")
    return ops.matmul(pooling_matrix(grid.shape[0], chunk), grid)


def chunk_occupancy(
    events: Sequence[EventLabel],
    duration_s: float,
    fps: int = 8,
    chunk: int = CHUNK_FRAMES
) -> np.ndarray:
    """[ceil(F/8)] flags, 1.0 where the chunk holds at least one event"""
    n_frames = n_grid_frames(duration_s, fps)
    occupied = np.zeros(-(-n_frames // chunk))
    for e in events:
        f = min(max(e.frame_index(fps), 0), n_frames - 1)
        occupied[f // chunk] = 1.0
    return occupied


def project_and_attach(
    pooled: Tensor,
    sampled_frame_indices: Sequence[int],
    weights: Mapping[str, Tensor],
    occupancy: Optional[np.ndarray] = None,
    chunk: int = CHUNK_FRAMES
) -> Tensor:
    """
    Fused rows for the sampled frames: W_p . pooled[floor(f/8)] + b.

    Args:
        pooled: [C, d_e] chunk means
        sampled_frame_indices: The T frames of the clip
        weights: Holds the projection
        occupancy: Optional [C] chunk flags gating the bias; an empty chunk then
            yields an exactly zero row
        chunk: Frames per chunk

    Returns:
        [T, d_model]

    Raises:
        IndexOutOfRangeError: a sampled frame lies outside the pooled grid
    """
    frames = np.asarray(sampled_frame_indices, dtype=np.int64)
    n_chunks = pooled.shape[0]
    if frames.size == 0 or frames.min() < 0 or frames.max() // chunk >= n_chunks:
        raise IndexOutOfRangeError(f"sampled frames {frames.tolist()} outside a grid of {n_chunks} chunks")
    chunks = frames // chunk
    rows = ops.getitem(pooled, chunks)
    projected = ops.matmul(rows, weights[PROJ_W])
    bias = weights[PROJ_B]
    if occupancy is None:
        return ops.add(projected, bias)
    gate = np.asarray(occupancy, dtype=np.float64)[chunks].reshape(-1, 1)
    return ops.add(projected, ops.mul(bias, gate))


def causal_events(events: Sequence[EventLabel], t: int, fps: int = 8) -> List[EventLabel]:
    """Events whose frame lies strictly before second t's end (frame < fps * t)"""
    return [e for e in events if e.frame_index(fps) < fps * t]


def fuse_for_clip(
    events: Sequence[EventLabel],
    t: int,
    sampled_frame_indices: Sequence[int],
    weights: Mapping[str, Tensor],
    vocab: EventVocab,
    fps: int = 8
) -> Tensor:
    """
    [T, d_model] fused event vectors for a prediction at second t.

    Only events up to second t are rasterized; chunks without events contribute
    a zero row, so an empty stream reproduces the visual-only path exactly.
    """
    visible = causal_events(events, t, fps)
    grid = rasterize(visible, t, weights, vocab, fps)
    pooled = pool_chunks(grid)
    occupancy = chunk_occupancy(visible, t, fps)
    return project_and_attach(pooled, sampled_frame_indices, weights, occupancy)


def fuse_batch(
    samples: Sequence[Tuple[Sequence[EventLabel], int, Sequence[int]]],
    weights: Mapping[str, Tensor],
    vocab: EventVocab,
    fps: int = 8
) -> Tensor:
    """[B, T, d_model] fused vectors for (events, t, sampled frames) samples"""
    rows = []
    for events, t, indices in samples:
        fused = fuse_for_clip(events, t, indices, weights, vocab, fps)
        rows.append(ops.reshape(fused, (1,) + tuple(fused.shape)))
    return ops.concat(rows, axis=0)
