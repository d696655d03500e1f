"""Finite-difference check of the full classifier, event fusion included"""
import logging
from typing import List, Optional

import numpy as np

from core.minimap import AGENT_NAMES, ROSTER, EventKind, EventLabel, MapSpec, get_map
from core.tensor import grad_check, make_rng, ops
from modules.event_fusion.v1 import EventVocab, fuse_batch
from .clips import assemble_clip_indices
from .config import ModelConfig
from .model import forward_batch
from .weights import init_weights

logger = logging.getLogger(__name__)


def random_events(rng: np.random.Generator, map_spec: MapSpec, duration_s: int, n: int, fps: int = 8) -> List[EventLabel]:
    kinds = list(EventKind)
    events = []
    for _ in range(n):
        agent = AGENT_NAMES[int(rng.integers(len(AGENT_NAMES)))]
        events.append(EventLabel(
            timestamp=float(rng.integers(0, duration_s * fps)) / fps,
            team=ROSTER[agent],
            agent=agent,
            area=map_spec.area_names[int(rng.integers(len(map_spec.areas)))],
            kind=kinds[int(rng.integers(len(kinds)))]
        ))
    return events


def model_grad_check(
    cfg: ModelConfig,
    seed: int = 0,
    events_enabled: bool = True,
    batch: int = 1,
    entries_per_param: Optional[int] = 4,
    map_spec: Optional[MapSpec] = None
) -> float:
    """
    Max relative error between tape and finite-difference gradients of the
    cross-entropy loss over one random batch (dropout off).

    Args:
        cfg: Model configuration
        seed: Seeds weights, clips, events and the entry sample
        events_enabled: Check Model B (fusion tensors included)
        batch: Clips in the batch
        entries_per_param: Entries checked per tensor (all when None)
        map_spec: Map for the event vocabulary
    """
    map_spec = map_spec or get_map()
    rng = make_rng(seed, "gradcheck_data")
    weights = init_weights(cfg, seed, events_enabled, map_spec)
    clips = rng.uniform(0.0, 1.0, size=(batch, cfg.frames_per_clip, cfg.image_size, cfg.image_size, 3))
    labels = rng.integers(0, cfg.n_classes, size=batch)
    samples = []
    for _ in range(batch):
        t = int(rng.integers(2, 12))
        indices = assemble_clip_indices(t, cfg.fps, cfg.frames_per_clip, cfg.clip_mode)
        samples.append((random_events(rng, map_spec, t, 12, cfg.fps), t, indices))
    vocab = EventVocab.for_map(map_spec) if events_enabled else None

    def loss():
        fused = fuse_batch(samples, weights, vocab, cfg.fps) if events_enabled else None
        return ops.cross_entropy_with_logits(forward_batch(clips, weights, cfg, fused), labels)

    error = grad_check(loss, weights.tensors(), entries_per_param=entries_per_param, seed=seed)
    logger.info(f"Model grad check ({len(weights)} tensors, events={events_enabled}): max relative error {error:.3e}")
    return error
