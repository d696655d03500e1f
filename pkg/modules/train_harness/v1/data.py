"""
Round access for training and evaluation, and the classifier wrapper that
turns (round, second) pairs into logits.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.minimap import EventLabel, MapSpec, get_map
from core.round_store import RoundRecord, RoundStore, Split, get_round_store
from core.tensor import Tensor, parameter
from modules.event_fusion.v1 import EventVocab, fuse_batch, read_events
from modules.spacetime_model.v1 import (
    ModelConfig,
    ModelWeights,
    assemble_clip_indices,
    forward_batch,
    prepare_clip
)
from modules.synth_arena.v1 import truth_renderer
from .checkpoint import Checkpoint

logger = logging.getLogger(__name__)

FrameReader = Callable[[int], np.ndarray]
Example = Tuple[RoundRecord, int]


class RoundData:
    """Rounds of one dataset with their frame readers and event lists"""

    def __init__(self, store: RoundStore, events: Dict[str, List[EventLabel]], map_spec: MapSpec):
        self.store = store
        self.events = events
        self.map_spec = map_spec
        self._readers: Dict[str, FrameReader] = {}

    @classmethod
    def load(cls, data_dir: Path) -> "RoundData":
        store = get_round_store(Path(data_dir), renderer=truth_renderer)
        events = read_events(store.events_path) if store.events_path.exists() else {}
        map_id = store.info.get("map") or (store.rounds()[0].map_id if store.rounds() else None)
        map_spec = get_map(map_id) if map_id else get_map()
        return cls(store, events, map_spec)

    def rounds(self, split: Optional[Split] = None) -> List[RoundRecord]:
        return self.store.rounds(split)

    def require_split(self, split: Split) -> List[RoundRecord]:
        return self.store.require_split(split)

    def reader(self, record: RoundRecord) -> FrameReader:
        if record.round_id not in self._readers:
            self._readers[record.round_id] = self.store.frame_reader(record)
        return self._readers[record.round_id]

    def events_for(self, record: RoundRecord) -> List[EventLabel]:
        return self.events.get(record.round_id, [])


def sample_examples(records: Sequence[RoundRecord], rng: np.random.Generator, batch_size: int) -> List[Example]:
    """Rounds drawn uniformly, each with a second t uniform over [1, duration]"""
    examples = []
    for _ in range(batch_size):
        record = records[int(rng.integers(len(records)))]
        examples.append((record, int(rng.integers(1, record.duration_s + 1))))
    return examples


class Classifier:
    """
    Weights plus configuration of Model A (visual only) or Model B (with
    event fusion, when the weights carry fusion tensors).
    """

    def __init__(self, weights: ModelWeights, cfg: ModelConfig, vocab: Optional[EventVocab] = None):
        self.weights = weights
        self.cfg = cfg
        self.vocab = vocab
        if weights.has_fusion and vocab is None:
            raise ValueError("event fusion weights need an event vocabulary")

    @property
    def events_enabled(self) -> bool:
        return self.weights.has_fusion

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "Classifier":
        cfg = ModelConfig(**checkpoint.config["model"])
        weights = ModelWeights({name: parameter(value.astype(np.float64)) for name, value in checkpoint.params.items()})
        vocab = None
        if weights.has_fusion:
            vocab = EventVocab.for_map(get_map(checkpoint.config.get("map_id") or get_map().map_id))
        return cls(weights, cfg, vocab)

    def clip_indices(self, t: int) -> np.ndarray:
        return assemble_clip_indices(t, self.cfg.fps, self.cfg.frames_per_clip, self.cfg.clip_mode)

    def logits(
        self,
        clips: np.ndarray,
        event_samples: Optional[Sequence[Tuple[Sequence[EventLabel], int, Sequence[int]]]] = None,
        training: bool = False,
        rng: Optional[np.random.Generator] = None
    ) -> Tensor:
        """
        [B, 2] logits.

        Args:
            clips: [B, T, S, S, 3] in [0, 1]
            event_samples: (events, t, frame indices) per clip; ignored by Model A
            training: Enable dropout
            rng: Dropout generator
        """
        fused = None
        if self.events_enabled and event_samples is not None:
            fused = fuse_batch(event_samples, self.weights, self.vocab, self.cfg.fps)
        return forward_batch(clips, self.weights, self.cfg, fused, training, rng)

    def prepare(
        self,
        readers: Sequence[FrameReader],
        events: Sequence[Sequence[EventLabel]],
        seconds: Sequence[int],
        threads: int = 1
    ) -> Tuple[np.ndarray, List[Tuple[Sequence[EventLabel], int, np.ndarray]]]:
        """Clips and event samples for parallel lists of (reader, events, t)"""
        indices = [self.clip_indices(t) for t in seconds]

        def clip(i: int) -> np.ndarray:
            return prepare_clip(readers[i], indices[i], self.cfg.image_size)

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            clips = list(pool.map(clip, range(len(seconds))))
        samples = [(events[i], int(seconds[i]), indices[i]) for i in range(len(seconds))]
        return np.stack(clips), samples

    def predict_logits(
        self,
        reader: FrameReader,
        events: Sequence[EventLabel],
        seconds: Sequence[int],
        batch_size: int = 16,
        threads: int = 1
    ) -> np.ndarray:
        """[len(seconds), 2] logits for one round; the clip at t only reads frames before second t"""
        out = []
        for lo in range(0, len(seconds), batch_size):
            chunk = list(seconds[lo:lo + batch_size])
            clips, samples = self.prepare([reader] * len(chunk), [events] * len(chunk), chunk, threads)
            out.append(self.logits(clips, samples).data)
        return np.concatenate(out, axis=0) if out else np.zeros((0, 2))
