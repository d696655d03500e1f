"""
Divided space-time attention classifier.

Token layout per clip: one CLS token followed by T x N patch tokens in
frame-major order (frame t, patch n -> index 1 + t * N + n).
"""
import logging
import math
from typing import Optional

import numpy as np

from core.errors import ShapeMismatchError
from core.tensor import Tensor, ops
from .config import ModelConfig
from .weights import ModelWeights

logger = logging.getLogger(__name__)


def normalize_pixels(clips: np.ndarray) -> np.ndarray:
    """[0, 1] RGB (or uint8) -> (x - 0.5) / 0.5 per channel"""
    clips = np.asarray(clips)
    if clips.dtype == np.uint8:
        clips = clips.astype(np.float64) / 255.0
    return (clips.astype(np.float64) - 0.5) / 0.5


def extract_patches(clips: np.ndarray, patch_size: int) -> np.ndarray:
    """
    [B, T, H, W, 3] -> [B, T, N, 3*P*P]; patches in row-major grid order,
    each flattened as (row, col, channel).
    """
    b, t, h, w, c = clips.shape
    p = patch_size
    grid = clips.reshape(b, t, h // p, p, w // p, p, c)
    grid = grid.transpose(0, 1, 2, 4, 3, 5, 6)
    return grid.reshape(b, t, (h // p) * (w // p), p * p * c)


def _check_clips(clips: np.ndarray, cfg: ModelConfig) -> None:
    expected = (cfg.frames_per_clip, cfg.image_size, cfg.image_size, 3)
    if clips.ndim != 5 or clips.shape[1:] != expected:
        raise ShapeMismatchError(f"clips {clips.shape} do not match [B, {', '.join(map(str, expected))}]")


def _patch_tokens(clips: np.ndarray, weights: ModelWeights, cfg: ModelConfig, fused: Optional[Tensor]) -> Tensor:
    """[B, T, N, d] patch tokens with fused events and positions added"""
    _check_clips(clips, cfg)
    b = clips.shape[0]
    t, n, d = cfg.frames_per_clip, cfg.n_patches, cfg.d_model
    patches = Tensor(extract_patches(normalize_pixels(clips), cfg.patch_size))
    tokens = ops.linear(patches, weights["patch.w"], weights["patch.b"])
    if fused is not None:
        if fused.shape != (b, t, d):
            raise ShapeMismatchError(f"fused event vectors {fused.shape} != {(b, t, d)}")
        tokens = ops.add(tokens, ops.reshape(fused, (b, t, 1, d)))
    space = ops.reshape(ops.getitem(weights["pos.space"], slice(1, None)), (1, 1, n, d))
    time = ops.reshape(weights["pos.time"], (1, t, 1, d))
    return ops.add(ops.add(tokens, space), time)


def patch_embed(
    clip: np.ndarray,
    weights: ModelWeights,
    cfg: ModelConfig,
    fused_event_tokens: Optional[Tensor] = None
) -> Tensor:
    """
    Patchify and project one clip.

    Args:
        clip: [T, H, W, 3] floats in [0, 1]
        weights: Model weights
        cfg: Model configuration
        fused_event_tokens: Optional [T, d] vectors added to every patch of their frame

    Returns:
        [T, N, d] tokens including spatial and temporal positional embeddings

    Raises:
        ShapeMismatchError: clip dims differ from the config
    """
    clip = np.asarray(clip)
    fused = None
    if fused_event_tokens is not None:
        fused = ops.reshape(fused_event_tokens, (1,) + tuple(fused_event_tokens.shape))
    tokens = _patch_tokens(clip[None], weights, cfg, fused)
    return ops.reshape(tokens, (cfg.frames_per_clip, cfg.n_patches, cfg.d_model))


def embed(clips: np.ndarray, weights: ModelWeights, cfg: ModelConfig, fused: Optional[Tensor] = None) -> Tensor:
    """[B, T*N + 1, d] token sequence with the CLS token first"""
    b = clips.shape[0]
    t, n, d = cfg.frames_per_clip, cfg.n_patches, cfg.d_model
    tokens = ops.reshape(_patch_tokens(clips, weights, cfg, fused), (b, t * n, d))
    cls = ops.add(weights["cls"], ops.getitem(weights["pos.space"], 0))
    cls = ops.broadcast_to(ops.reshape(cls, (1, 1, d)), (b, 1, d))
    return ops.concat([cls, tokens], axis=1)


def multi_head_attention(
    x: Tensor,
    prefix: str,
    weights: ModelWeights,
    cfg: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None
) -> Tensor:
    """Scaled dot-product self-attention within each of G groups: [G, n, d] -> [G, n, d]"""
    g, n, d = x.shape
    h, dh = cfg.n_heads, cfg.head_dim
    qkv = ops.linear(x, weights[f"{prefix}.qkv.w"], weights[f"{prefix}.qkv.b"])
    qkv = ops.transpose(ops.reshape(qkv, (g, n, 3, h, dh)), (2, 0, 3, 1, 4))
    q, k, v = ops.getitem(qkv, 0), ops.getitem(qkv, 1), ops.getitem(qkv, 2)
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(dh))
    attn = ops.softmax(scores, axis=-1)
    out = ops.matmul(attn, v)
    out = ops.reshape(ops.transpose(out, (0, 2, 1, 3)), (g, n, d))
    out = ops.linear(out, weights[f"{prefix}.out.w"], weights[f"{prefix}.out.b"])
    return ops.dropout(out, cfg.dropout_p, rng, training)


def divided_block(
    z: Tensor,
    layer_index: int,
    weights: ModelWeights,
    cfg: ModelConfig,
    training: bool = False,
    rng: Optional[np.random.Generator] = None
) -> Tensor:
    """
    One divided space-time block over [T*N + 1, d] (or batched [B, T*N + 1, d]).

    Time attention runs over the T tokens sharing a patch index; the CLS token
    passes through it unchanged. Space attention runs over each frame's N
    tokens plus a per-frame copy of CLS; the T CLS outputs are averaged back
    into the single CLS slot. Then a pre-norm MLP.

    Raises:
        ShapeMismatchError: token count is not T*N + 1
    """
    single = z.ndim == 2
    if single:
        z = ops.reshape(z, (1,) + tuple(z.shape))
    b = z.shape[0]
    t, n, d = cfg.frames_per_clip, cfg.n_patches, cfg.d_model
    if z.ndim != 3 or z.shape[1:] != (cfg.n_tokens, d):
        raise ShapeMismatchError(f"block input {z.shape} != [B, {cfg.n_tokens}, {d}]")
    p = f"layers.{layer_index}"

    cls = ops.getitem(z, (slice(None), slice(0, 1)))
    patches = ops.getitem(z, (slice(None), slice(1, None)))

    # time
    h = ops.layer_norm(patches, weights[f"{p}.time_ln.g"], weights[f"{p}.time_ln.b"])
    h = ops.reshape(ops.transpose(ops.reshape(h, (b, t, n, d)), (0, 2, 1, 3)), (b * n, t, d))
    h = multi_head_attention(h, f"{p}.time_attn", weights, cfg, training, rng)
    h = ops.reshape(ops.transpose(ops.reshape(h, (b, n, t, d)), (0, 2, 1, 3)), (b, t * n, d))
    patches = ops.add(patches, h)

    # space
    g, beta = weights[f"{p}.space_ln.g"], weights[f"{p}.space_ln.b"]
    hc = ops.broadcast_to(ops.reshape(ops.layer_norm(cls, g, beta), (b, 1, 1, d)), (b, t, 1, d))
    hp = ops.reshape(ops.layer_norm(patches, g, beta), (b, t, n, d))
    s = ops.reshape(ops.concat([hc, hp], axis=2), (b * t, n + 1, d))
    s = ops.reshape(multi_head_attention(s, f"{p}.space_attn", weights, cfg, training, rng), (b, t, n + 1, d))
    cls = ops.add(cls, ops.mean(ops.getitem(s, (slice(None), slice(None), slice(0, 1))), axis=1))
    patches = ops.add(patches, ops.reshape(ops.getitem(s, (slice(None), slice(None), slice(1, None))), (b, t * n, d)))
    z = ops.concat([cls, patches], axis=1)

    # mlp
    m = ops.layer_norm(z, weights[f"{p}.mlp_ln.g"], weights[f"{p}.mlp_ln.b"])
    m = ops.gelu(ops.linear(m, weights[f"{p}.mlp.fc1.w"], weights[f"{p}.mlp.fc1.b"]))
    m = ops.linear(m, weights[f"{p}.mlp.fc2.w"], weights[f"{p}.mlp.fc2.b"])
    z = ops.add(z, ops.dropout(m, cfg.dropout_p, rng, training))

    if single:
        z = ops.reshape(z, (cfg.n_tokens, d))
    return z


def forward_batch(
    clips: np.ndarray,
    weights: ModelWeights,
    cfg: ModelConfig,
    fused: Optional[Tensor] = None,
    training: bool = False,
    rng: Optional[np.random.Generator] = None
) -> Tensor:
    """
    Logits [B, 2] for a batch of clips.

    Args:
        clips: [B, T, H, W, 3] floats in [0, 1] (or uint8)
        weights: Model weights
        cfg: Model configuration
        fused: Optional [B, T, d] event vectors (early fusion)
        training: Enable dropout
        rng: Dropout generator (required when training with dropout)
    """
    z = embed(np.asarray(clips), weights, cfg, fused)
    for i in range(cfg.n_layers):
        z = divided_block(z, i, weights, cfg, training, rng)
    cls = ops.getitem(z, (slice(None), 0))
    cls = ops.layer_norm(cls, weights["final_ln.g"], weights["final_ln.b"])
    return ops.linear(cls, weights["head.w"], weights["head.b"])


def forward_classify(
    clip: np.ndarray,
    weights: ModelWeights,
    cfg: ModelConfig,
    fused_event_tokens: Optional[Tensor] = None
) -> Tensor:
    """
    Two logits (attacker win, defender win) for one clip of exactly T frames.

    Deterministic: dropout is off.
    """
    clip = np.asarray(clip)
    fused = None
    if fused_event_tokens is not None:
        fused = ops.reshape(fused_event_tokens, (1,) + tuple(fused_event_tokens.shape))
    logits = forward_batch(clip[None], weights, cfg, fused)
    return ops.getitem(logits, 0)


def predict_proba(logits: Tensor) -> np.ndarray:
    """Softmax probabilities from [.., 2] logits"""
    return ops.softmax(logits, axis=-1).data
