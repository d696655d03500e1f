"""Spacetime model v1: divided space-time attention with an early-fusion hook"""
from .config import MODEL_PRESETS, ClipMode, ModelConfig, model_preset
from .weights import ModelWeights, decays, expected_shapes, init_weights
from .model import (
    divided_block,
    embed,
    extract_patches,
    forward_batch,
    forward_classify,
    multi_head_attention,
    normalize_pixels,
    patch_embed,
    predict_proba
)
from .clips import assemble_clip_indices, prepare_clip, resize_frame
from .gradcheck import model_grad_check, random_events

__all__ = [
    "MODEL_PRESETS",
    "ClipMode",
    "ModelConfig",
    "model_preset",
    "ModelWeights",
    "decays",
    "expected_shapes",
    "init_weights",
    "divided_block",
    "embed",
    "extract_patches",
    "forward_batch",
    "forward_classify",
    "multi_head_attention",
    "normalize_pixels",
    "patch_embed",
    "predict_proba",
    "assemble_clip_indices",
    "prepare_clip",
    "resize_frame",
    "model_grad_check",
    "random_events"
]
