"""Event embeddings, chunk pooling, projection and the events JSONL format"""
import numpy as np
import numpy.testing as npt
import pytest

from core.errors import IndexOutOfRangeError, PipelineIOError, ShapeMismatchError, UnknownVocabError
from core.minimap import EventKind, EventLabel, Team
from core.tensor import Tensor, grad_check, make_rng, ops
from modules.event_fusion.v1 import (
    EventVocab,
    causal_events,
    chunk_occupancy,
    fuse_for_clip,
    init_fusion_weights,
    pool_chunks,
    pooling_matrix,
    project_and_attach,
    rasterize,
    read_events,
    write_events,
    write_round_events
)
from modules.event_fusion.v1.fusion import AGENT_TABLE, AREA_TABLE, KIND_TABLE, PROJ_B, TEAM_TABLE


def _event(t, agent="ash", team=Team.ATTACKER, area="mid", kind=EventKind.SKILL_USE):
    return EventLabel(timestamp=t, team=team, agent=agent, area=area, kind=kind)


@pytest.fixture
def vocab(map_spec):
    return EventVocab.for_map(map_spec)


@pytest.fixture
def weights(vocab):
    return init_fusion_weights(4, 6, vocab, make_rng(0, "fusion_init"))


def test_vocab_orders(vocab, map_spec):
    assert vocab.teams == ("ATK", "DEF")
    assert vocab.kinds == ("skill_use", "footstep_heard", "spike_plant")
    assert list(vocab.areas) == map_spec.area_names
    assert len(vocab.agents) == 10


def test_rasterize_sums_embeddings_per_frame(weights, vocab):
    a = _event(0.5)
    b = _event(0.5, agent="frost", team=Team.DEFENDER, area="site_b", kind=EventKind.FOOTSTEP_HEARD)
    grid = rasterize([a, b], 2.0, weights, vocab)
    assert grid.shape == (16, 4)

    def row(e):
        ids = vocab.ids(e)
        return (weights[TEAM_TABLE].data[ids[0]] + weights[AGENT_TABLE].data[ids[1]]
                + weights[AREA_TABLE].data[ids[2]] + weights[KIND_TABLE].data[ids[3]])

    npt.assert_allclose(grid.data[4], row(a) + row(b))
    npt.assert_array_equal(np.delete(grid.data, 4, axis=0), np.zeros((15, 4)))


def test_rasterize_empty_stream_is_zero(weights, vocab):
    grid = rasterize([], 3.0, weights, vocab)
    npt.assert_array_equal(grid.data, np.zeros((24, 4)))


def test_rasterize_rejects_unknown_agent_and_area(weights, vocab):
    with pytest.raises(UnknownVocabError):
        rasterize([_event(1.0, agent="nobody")], 2.0, weights, vocab)
    with pytest.raises(UnknownVocabError):
        rasterize([_event(1.0, area="nowhere")], 2.0, weights, vocab)


def test_pooling_matrix_last_chunk_uses_actual_length():
    pool = pooling_matrix(20)
    assert pool.shape == (3, 20)
    npt.assert_allclose(pool.sum(axis=1), [1.0, 1.0, 1.0])
    npt.assert_allclose(pool[2, 16:], np.full(4, 0.25))
    npt.assert_allclose(pool[0, :8], np.full(8, 0.125))


def test_pool_chunks_means():
    grid = Tensor(np.arange(20, dtype=np.float64).reshape(10, 2))
    pooled = pool_chunks(grid)
    npt.assert_allclose(pooled.data, [[7.0, 8.0], [17.0, 18.0]])
    with pytest.raises(ShapeMismatchError):
        pool_chunks(Tensor(np.zeros((0, 2))))


def test_chunk_occupancy(vocab):
    occupied = chunk_occupancy([_event(0.0), _event(2.25)], 3.0)
    npt.assert_array_equal(occupied, [1.0, 0.0, 1.0])


def test_project_and_attach_gates_bias_on_empty_chunks(weights):
    weights[PROJ_B].data[...] = 1.0
    pooled = Tensor(np.zeros((3, 4)))
    rows = project_and_attach(pooled, [0, 9, 17], weights, occupancy=np.array([1.0, 0.0, 0.0]))
    npt.assert_array_equal(rows.data[0], np.ones(6))
    npt.assert_array_equal(rows.data[1:], np.zeros((2, 6)))
    ungated = project_and_attach(pooled, [0, 9, 17], weights)
    npt.assert_array_equal(ungated.data, np.ones((3, 6)))


def test_project_and_attach_rejects_frames_outside_grid(weights):
    with pytest.raises(IndexOutOfRangeError):
        project_and_attach(Tensor(np.zeros((2, 4))), [0, 16], weights)
    with pytest.raises(IndexOutOfRangeError):
        project_and_attach(Tensor(np.zeros((2, 4))), [-1], weights)


def test_causal_events_cut_at_second_end():
    events = [_event(0.0), _event(4.875), _event(5.0), _event(7.5)]
    assert [e.timestamp for e in causal_events(events, 5)] == [0.0, 4.875]


def test_fuse_for_clip_ignores_future_events(weights, vocab):
    indices = [0, 13, 26, 39]
    past = [_event(1.0)]
    future = past + [_event(5.5, agent="iris", team=Team.DEFENDER)]
    npt.assert_array_equal(fuse_for_clip(past, 5, indices, weights, vocab).data,
                           fuse_for_clip(future, 5, indices, weights, vocab).data)


def test_fusion_gradients(weights, vocab):
    events = [_event(0.25), _event(1.5, agent="gale", team=Team.DEFENDER, kind=EventKind.FOOTSTEP_HEARD),
              _event(2.0, agent="bolt", area="site_a", kind=EventKind.SPIKE_PLANT)]
    target = make_rng(3, "target").normal(size=(4, 6))

    def loss():
        return ops.sum(ops.mul(fuse_for_clip(events, 3, [0, 8, 16, 23], weights, vocab), target))

    assert grad_check(loss, list(weights.values())) < 1e-5


def test_events_jsonl_round_trip(tmp_path):
    by_round = {
        "r00001": [_event(3.0), _event(1.0, agent="cinder")],
        "r00000": [_event(2.0, agent="haze", team=Team.DEFENDER, kind=EventKind.FOOTSTEP_HEARD)]
    }
    path = tmp_path / "events.jsonl"
    assert write_events(path, by_round) == 3
    lines = path.read_text().splitlines()
    assert '"round_id": "r00000"' in lines[0]
    loaded = read_events(path)
    assert [e.timestamp for e in loaded["r00001"]] == [1.0, 3.0]
    assert loaded["r00000"][0].agent == "haze"


def test_single_round_events_land_under_empty_id(tmp_path):
    path = tmp_path / "round.jsonl"
    write_round_events(path, [_event(2.5, kind=EventKind.SPIKE_PLANT)])
    assert read_events(path)[""][0].kind is EventKind.SPIKE_PLANT


def test_malformed_event_record(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"t": 1.0, "team": "ATK", "agent": "ash", "area": "mid", "kind": "teleport"}\n')
    with pytest.raises(PipelineIOError):
        read_events(path)
    with pytest.raises(PipelineIOError):
        read_events(tmp_path / "missing.jsonl")
