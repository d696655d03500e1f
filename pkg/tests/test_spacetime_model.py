"""Divided space-time attention classifier"""
import math

import numpy as np
import numpy.testing as npt
import pytest

from core.errors import IndexOutOfRangeError, ShapeMismatchError
from core.minimap import EventKind, EventLabel, Team
from core.tensor import Tensor, make_rng
from modules.event_fusion.v1 import EventVocab, fuse_batch
from modules.spacetime_model.v1 import (
    ClipMode,
    ModelConfig,
    assemble_clip_indices,
    decays,
    divided_block,
    embed,
    expected_shapes,
    extract_patches,
    forward_batch,
    forward_classify,
    init_weights,
    model_grad_check,
    model_preset,
    multi_head_attention,
    patch_embed,
    predict_proba
)


def _ln(x, g, b, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * g + b


def _gelu(x):
    return 0.5 * x * (1.0 + np.tanh(math.sqrt(2.0 / math.pi) * (x + 0.044715 * x ** 3)))


def _attend(x, prefix, w, cfg):
    """Dense self-attention over one group, head by head"""
    n, d = x.shape
    h, dh = cfg.n_heads, cfg.head_dim
    qkv = (x @ w[f"{prefix}.qkv.w"].data + w[f"{prefix}.qkv.b"].data).reshape(n, 3, h, dh)
    heads = []
    for head in range(h):
        q, k, v = qkv[:, 0, head], qkv[:, 1, head], qkv[:, 2, head]
        scores = q @ k.T / math.sqrt(dh)
        scores = np.exp(scores - scores.max(axis=1, keepdims=True))
        heads.append((scores / scores.sum(axis=1, keepdims=True)) @ v)
    return np.concatenate(heads, axis=1) @ w[f"{prefix}.out.w"].data + w[f"{prefix}.out.b"].data


def _naive_block(z, layer, w, cfg):
    t, n, d = cfg.frames_per_clip, cfg.n_patches, cfg.d_model
    p = f"layers.{layer}"
    cls = z[0].copy()
    patches = z[1:].reshape(t, n, d).copy()

    g, b = w[f"{p}.time_ln.g"].data, w[f"{p}.time_ln.b"].data
    for j in range(n):
        patches[:, j] += _attend(_ln(patches[:, j], g, b), f"{p}.time_attn", w, cfg)

    g, b = w[f"{p}.space_ln.g"].data, w[f"{p}.space_ln.b"].data
    cls_outs = []
    for i in range(t):
        seq = np.concatenate([_ln(cls, g, b)[None], _ln(patches[i], g, b)], axis=0)
        out = _attend(seq, f"{p}.space_attn", w, cfg)
        cls_outs.append(out[0])
        patches[i] += out[1:]
    cls = cls + np.mean(cls_outs, axis=0)

    z = np.concatenate([cls[None], patches.reshape(t * n, d)], axis=0)
    m = _ln(z, w[f"{p}.mlp_ln.g"].data, w[f"{p}.mlp_ln.b"].data)
    m = _gelu(m @ w[f"{p}.mlp.fc1.w"].data + w[f"{p}.mlp.fc1.b"].data)
    return z + m @ w[f"{p}.mlp.fc2.w"].data + w[f"{p}.mlp.fc2.b"].data


def _clips(cfg, batch=2, seed=0):
    rng = make_rng(seed, "clips")
    return rng.uniform(0.0, 1.0, size=(batch, cfg.frames_per_clip, cfg.image_size, cfg.image_size, 3))


def _perturb(weights, seed=1):
    """Non-trivial layer norms and biases so the oracle comparison exercises them"""
    rng = make_rng(seed, "perturb")
    for _, t in weights.items():
        t.data += rng.normal(0.0, 0.3, size=t.shape)


DESK = model_preset("desk")


@pytest.fixture(scope="module")
def desk_weights():
    weights = init_weights(DESK, seed=4)
    _perturb(weights)
    return weights


@pytest.mark.parametrize("seed", range(50))
def test_divided_block_matches_dense_per_group_oracle(desk_weights, seed):
    z = make_rng(seed, "tokens").normal(size=(DESK.n_tokens, DESK.d_model))
    layer = seed % DESK.n_layers
    out = divided_block(Tensor(z), layer, desk_weights, DESK)
    npt.assert_allclose(out.data, _naive_block(z, layer, desk_weights, DESK), rtol=1e-9, atol=1e-9)


def test_single_frame_block_matches_oracle():
    cfg = ModelConfig(image_size=16, patch_size=8, frames_per_clip=1, d_model=8, n_layers=1, n_heads=2)
    weights = init_weights(cfg, seed=2)
    _perturb(weights)
    z = make_rng(0, "tokens").normal(size=(cfg.n_tokens, cfg.d_model))
    npt.assert_allclose(divided_block(Tensor(z), 0, weights, cfg).data, _naive_block(z, 0, weights, cfg),
                        rtol=1e-9, atol=1e-9)


def _value_path(x, prefix, w, cfg):
    d = cfg.d_model
    v = x @ w[f"{prefix}.qkv.w"].data[:, 2 * d:] + w[f"{prefix}.qkv.b"].data[2 * d:]
    return v @ w[f"{prefix}.out.w"].data + w[f"{prefix}.out.b"].data


def test_single_token_attention_is_the_value_path(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=3)
    _perturb(weights)
    x = make_rng(1, "tokens").normal(size=(5, 1, cfg.d_model))
    out = multi_head_attention(Tensor(x), "layers.0.time_attn", weights, cfg)
    npt.assert_allclose(out.data[:, 0], _value_path(x[:, 0], "layers.0.time_attn", weights, cfg), atol=1e-12)


def test_equal_scores_attend_uniformly(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=3)
    _perturb(weights)
    prefix, d = "layers.1.space_attn", cfg.d_model
    weights[f"{prefix}.qkv.w"].data[:, :d] = 0.0
    weights[f"{prefix}.qkv.b"].data[:d] = 0.0
    x = make_rng(2, "tokens").normal(size=(3, 7, d))
    out = multi_head_attention(Tensor(x), prefix, weights, cfg).data
    for g in range(3):
        mean_value = _value_path(x[g], prefix, weights, cfg).mean(axis=0)
        npt.assert_allclose(out[g], np.broadcast_to(mean_value, (7, d)), atol=1e-12)


def _permute_heads(weights, prefix, perm, cfg):
    d, dh = cfg.d_model, cfg.head_dim
    cols = np.concatenate([s * d + p * dh + np.arange(dh) for s in range(3) for p in perm])
    rows = np.concatenate([p * dh + np.arange(dh) for p in perm])
    weights[f"{prefix}.qkv.w"].data[...] = weights[f"{prefix}.qkv.w"].data[:, cols]
    weights[f"{prefix}.qkv.b"].data[...] = weights[f"{prefix}.qkv.b"].data[cols]
    weights[f"{prefix}.out.w"].data[...] = weights[f"{prefix}.out.w"].data[rows]


def test_block_is_invariant_to_head_order():
    cfg = model_preset("desk", n_layers=1)
    weights = init_weights(cfg, seed=6)
    _perturb(weights)
    z = make_rng(4, "tokens").normal(size=(cfg.n_tokens, cfg.d_model))
    before = divided_block(Tensor(z), 0, weights, cfg).data
    for attn in ("time_attn", "space_attn"):
        _permute_heads(weights, f"layers.0.{attn}", [2, 0, 3, 1], cfg)
    npt.assert_allclose(divided_block(Tensor(z), 0, weights, cfg).data, before, rtol=1e-10, atol=1e-10)


def test_divided_block_batched_matches_single(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=4)
    _perturb(weights)
    z = make_rng(3, "tokens").normal(size=(3, cfg.n_tokens, cfg.d_model))
    batched = divided_block(Tensor(z), 1, weights, cfg).data
    for i in range(3):
        npt.assert_allclose(batched[i], divided_block(Tensor(z[i]), 1, weights, cfg).data, atol=1e-12)


def test_divided_block_rejects_wrong_token_count(small_model_cfg):
    weights = init_weights(small_model_cfg, seed=0)
    with pytest.raises(ShapeMismatchError):
        divided_block(Tensor(np.zeros((small_model_cfg.n_tokens - 1, small_model_cfg.d_model))), 0, weights,
                      small_model_cfg)


def test_extract_patches_row_major_order():
    clips = np.arange(1 * 1 * 4 * 4 * 3, dtype=np.float64).reshape(1, 1, 4, 4, 3)
    patches = extract_patches(clips, 2)
    assert patches.shape == (1, 1, 4, 12)
    npt.assert_array_equal(patches[0, 0, 0], clips[0, 0, :2, :2].reshape(-1))
    npt.assert_array_equal(patches[0, 0, 1], clips[0, 0, :2, 2:].reshape(-1))
    npt.assert_array_equal(patches[0, 0, 2], clips[0, 0, 2:, :2].reshape(-1))


def test_embed_places_cls_first(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    z = embed(_clips(cfg), weights, cfg)
    assert z.shape == (2, cfg.n_tokens, cfg.d_model)
    npt.assert_allclose(z.data[0, 0], weights["cls"].data + weights["pos.space"].data[0])


def _zeroed(weights):
    for _, t in weights.items():
        t.data[...] = 0.0
    return weights


def test_patch_embed_zero_weights_leaves_positions():
    weights = _zeroed(init_weights(DESK, seed=0))
    weights["pos.space"].data[...] = make_rng(0, "pos").normal(size=weights["pos.space"].shape)
    weights["pos.time"].data[...] = make_rng(1, "pos").normal(size=weights["pos.time"].shape)
    clip = np.zeros((DESK.frames_per_clip, DESK.image_size, DESK.image_size, 3))
    tokens = patch_embed(clip, weights, DESK)
    assert DESK.n_patches == 64
    assert tokens.shape == (8, 64, 64)
    expected = weights["pos.space"].data[1:][None] + weights["pos.time"].data[:, None]
    npt.assert_array_equal(tokens.data, expected)


def test_patch_embed_one_hot_pixel_selects_projection_row(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    _perturb(weights)
    # 0.5 normalizes to 0, 1.0 to 1
    clip = np.full((cfg.frames_per_clip, cfg.image_size, cfg.image_size, 3), 0.5)
    clip[1, 10, 19, 2] = 1.0
    tokens = patch_embed(clip, weights, cfg).data
    base = weights["patch.b"].data + weights["pos.space"].data[1:][None] + weights["pos.time"].data[:, None]
    row = (2 * cfg.patch_size + 3) * 3 + 2
    expected = base.copy()
    expected[1, 1 * 4 + 2] += weights["patch.w"].data[row]
    npt.assert_allclose(tokens, expected, rtol=0, atol=1e-12)


def test_patch_embed_rejects_wrong_clip_dims(small_model_cfg):
    weights = init_weights(small_model_cfg, seed=0)
    with pytest.raises(ShapeMismatchError):
        patch_embed(np.zeros((small_model_cfg.frames_per_clip, 16, 16, 3)), weights, small_model_cfg)


def test_forward_classify_zero_weights_returns_head_bias(small_model_cfg):
    cfg = small_model_cfg
    weights = _zeroed(init_weights(cfg, seed=0))
    weights["head.b"].data[...] = [0.3, -1.2]
    logits = forward_classify(_clips(cfg, batch=1)[0], weights, cfg)
    assert logits.shape == (2,)
    npt.assert_array_equal(logits.data, [0.3, -1.2])


def test_forward_classify_absent_events_equal_zero_events(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    clip = _clips(cfg, batch=1)[0]
    zeros = Tensor(np.zeros((cfg.frames_per_clip, cfg.d_model)))
    npt.assert_array_equal(forward_classify(clip, weights, cfg).data,
                           forward_classify(clip, weights, cfg, zeros).data)
    npt.assert_array_equal(forward_classify(clip, weights, cfg).data,
                           forward_batch(clip[None], weights, cfg).data[0])


def test_swapping_head_columns_swaps_logits(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    _perturb(weights)
    clip = _clips(cfg, batch=1)[0]
    before = forward_classify(clip, weights, cfg).data
    weights["head.w"].data[...] = weights["head.w"].data[:, ::-1]
    weights["head.b"].data[...] = weights["head.b"].data[::-1]
    npt.assert_allclose(forward_classify(clip, weights, cfg).data, before[::-1], rtol=0, atol=1e-12)


def test_forward_batch_shapes_and_probabilities(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    logits = forward_batch(_clips(cfg), weights, cfg)
    assert logits.shape == (2, 2)
    npt.assert_allclose(predict_proba(logits).sum(axis=1), [1.0, 1.0])


def test_forward_batch_rejects_wrong_clip_dims(small_model_cfg):
    weights = init_weights(small_model_cfg, seed=0)
    with pytest.raises(ShapeMismatchError):
        forward_batch(np.zeros((1, 3, 32, 32, 3)), weights, small_model_cfg)


def test_eval_forward_is_deterministic_and_dropout_is_seeded(small_model_cfg):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=0)
    clips = _clips(cfg)
    npt.assert_array_equal(forward_batch(clips, weights, cfg).data, forward_batch(clips, weights, cfg).data)
    a = forward_batch(clips, weights, cfg, training=True, rng=make_rng(5, "dropout")).data
    b = forward_batch(clips, weights, cfg, training=True, rng=make_rng(5, "dropout")).data
    npt.assert_array_equal(a, b)
    assert not np.array_equal(a, forward_batch(clips, weights, cfg).data)


def _samples(cfg, events, t):
    indices = assemble_clip_indices(t, cfg.fps, cfg.frames_per_clip)
    return [(events, t, indices), (events, t, indices)]


def test_model_b_without_events_equals_model_a(small_model_cfg, map_spec):
    cfg = small_model_cfg
    model_a = init_weights(cfg, seed=7)
    model_b = init_weights(cfg, seed=7, events_enabled=True, map_spec=map_spec)
    _perturb(model_b, seed=9)
    model_a.load_arrays({name: t.data for name, t in model_b.items() if not name.startswith("fusion.")})
    clips = _clips(cfg)
    fused = fuse_batch(_samples(cfg, [], 6), model_b, EventVocab.for_map(map_spec), cfg.fps)
    npt.assert_array_equal(fused.data, np.zeros(fused.shape))
    npt.assert_array_equal(forward_batch(clips, model_b, cfg, fused).data, forward_batch(clips, model_a, cfg).data)


def test_events_change_logits_only_when_visible(small_model_cfg, map_spec):
    cfg = small_model_cfg
    weights = init_weights(cfg, seed=7, events_enabled=True, map_spec=map_spec)
    vocab = EventVocab.for_map(map_spec)
    clips = _clips(cfg)
    early = EventLabel(timestamp=2.0, team=Team.ATTACKER, agent="ash", area="site_a", kind=EventKind.SKILL_USE)
    late = EventLabel(timestamp=9.0, team=Team.DEFENDER, agent="jade", area="mid", kind=EventKind.FOOTSTEP_HEARD)

    base = forward_batch(clips, weights, cfg, fuse_batch(_samples(cfg, [], 6), weights, vocab, cfg.fps)).data
    with_late = forward_batch(clips, weights, cfg, fuse_batch(_samples(cfg, [late], 6), weights, vocab, cfg.fps)).data
    with_early = forward_batch(clips, weights, cfg, fuse_batch(_samples(cfg, [early], 6), weights, vocab, cfg.fps)).data
    npt.assert_array_equal(with_late, base)
    assert not np.array_equal(with_early, base)


def test_clip_indices_uniform_history():
    npt.assert_array_equal(assemble_clip_indices(1, 8, 8), np.arange(8))
    indices = assemble_clip_indices(10, 8, 8)
    assert indices[0] == 0 and indices[-1] == 79
    assert np.all(np.diff(indices) > 0)


def test_clip_indices_recent_window():
    npt.assert_array_equal(assemble_clip_indices(10, 8, 8, ClipMode.RECENT_WINDOW), np.arange(72, 80))
    npt.assert_array_equal(assemble_clip_indices(1, 8, 16, ClipMode.RECENT_WINDOW)[:8], np.zeros(8))


def test_clip_indices_reject_second_zero():
    with pytest.raises(IndexOutOfRangeError):
        assemble_clip_indices(0, 8, 8)


def test_weight_decay_exclusions():
    assert decays("layers.0.mlp.fc1.w")
    assert decays("fusion.agent")
    assert not decays("layers.0.mlp.fc1.b")
    assert not decays("layers.1.space_ln.g")
    assert not decays("final_ln.g")


def test_presets_shapes():
    paper = model_preset("paper")
    assert paper.n_patches == 196
    assert paper.n_tokens == 8 * 196 + 1
    assert expected_shapes(paper)["pos.space"] == (197, 768)
    with pytest.raises(KeyError):
        model_preset("huge")


def test_config_validation():
    with pytest.raises(ValueError):
        model_preset("desk", image_size=60)
    with pytest.raises(ValueError):
        model_preset("desk", n_heads=3)


@pytest.mark.parametrize("events_enabled", [False, True])
def test_tiny_model_gradients(tiny_model_cfg, map_spec, events_enabled):
    error = model_grad_check(tiny_model_cfg, seed=1, events_enabled=events_enabled, batch=2,
                             entries_per_param=8, map_spec=map_spec)
    assert error < 1e-4


@pytest.mark.slow
def test_desk_model_gradients(map_spec):
    cfg = model_preset("desk", dropout_p=0.0)
    assert model_grad_check(cfg, seed=0, events_enabled=True, entries_per_param=4, map_spec=map_spec) < 1e-4
