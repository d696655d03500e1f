"""Round simulator, renderer, dataset generation and extraction fidelity"""
import json

import numpy as np
import numpy.testing as npt
import pytest

from core.minimap import EventKind, EventLabel, Outcome, Team, footstep_events, sort_events
from core.round_store import FrameFormat, Split, get_round_store, open_stream, read_jsonl
from modules.minimap_vision.v1 import VisionConfig, detect_banner, extract_dataset, read_timer, score_extraction
from modules.synth_arena.v1 import (
    SUMMARY_FILE,
    GroundTruth,
    SimConfig,
    derive_seed,
    duration_bucket,
    event_advantage,
    generate_dataset,
    render_stream_frame,
    simulate_round,
    truth_renderer
)


@pytest.fixture(scope="module")
def rounds():
    cfg = SimConfig(seed=3)
    return [simulate_round(cfg, derive_seed(cfg.seed, i)) for i in range(12)]


class TestSimulator:
    def test_deterministic_given_seed(self, sim_cfg):
        a = simulate_round(sim_cfg, 42)
        b = simulate_round(sim_cfg, 42)
        assert a.model_dump() == b.model_dump()
        assert simulate_round(sim_cfg, 43).model_dump() != a.model_dump()

    def test_duration_cap(self, rounds):
        for truth in rounds:
            assert 1 <= truth.duration_s <= 100
            assert truth.n_frames % truth.fps == 0
            assert all(len(track) == truth.n_frames for track in truth.tracks.values())

    def test_end_reasons_match_outcomes(self, rounds):
        for truth in rounds:
            if truth.end_reason in ("defuse", "time"):
                assert truth.outcome is Outcome.DEFENDER_WIN
            if truth.end_reason == "detonation":
                assert truth.outcome is Outcome.ATTACKER_WIN
                assert truth.spike is not None

    def test_footsteps_follow_the_shared_rule(self, rounds, map_spec):
        cfg = SimConfig(seed=3)
        for truth in rounds:
            expected = footstep_events(truth.tracks, map_spec, truth.fps, map_spec.audible_radius,
                                       cfg.v_min, cfg.speed_window)
            recorded = [e for e in truth.events if e.kind is EventKind.FOOTSTEP_HEARD]
            assert recorded == sort_events(expected)

    def test_skill_events_match_effect_spans(self, rounds):
        for truth in rounds:
            skills = [(e.agent, e.frame_index(truth.fps)) for e in truth.events if e.kind is EventKind.SKILL_USE]
            assert sorted(skills) == sorted((s.agent, s.start_frame) for s in truth.effects)

    def test_spike_plant_event(self, rounds):
        for truth in rounds:
            plants = [e for e in truth.events if e.kind is EventKind.SPIKE_PLANT]
            if truth.spike is None:
                assert plants == []
                continue
            assert len(plants) == 1
            assert plants[0].agent == truth.spike.planter
            assert plants[0].frame_index(truth.fps) == truth.spike.plant_frame

    def test_events_sorted_and_inside_round(self, rounds):
        for truth in rounds:
            assert truth.events == sort_events(truth.events)
            assert all(0 <= e.frame_index(truth.fps) < truth.n_frames for e in truth.events)

    def test_derive_seed(self):
        assert derive_seed(7, 3) == derive_seed(7, 3)
        assert derive_seed(7, 3) != derive_seed(7, 4)
        assert 0 <= derive_seed(7, 3) < 2 ** 63

    def test_config_rejects_bonus_overflow(self):
        with pytest.raises(ValueError):
            SimConfig(p0=0.8)
        with pytest.raises(ValueError):
            SimConfig(spike_timer_s=100)


class TestRender:
    def test_render_is_pure(self, rounds):
        truth = rounds[0]
        for index in (0, truth.lead_in_frames, truth.stream_frames - 1):
            npt.assert_array_equal(render_stream_frame(truth, index).pixels, render_stream_frame(truth, index).pixels)

    def test_stream_layout(self, rounds, map_spec):
        truth = next(t for t in rounds if t.n_frames > t.fps)
        lead = truth.lead_in_frames
        assert read_timer(render_stream_frame(truth, lead - 1), map_spec) is None
        assert read_timer(render_stream_frame(truth, lead), map_spec) == 100
        assert read_timer(render_stream_frame(truth, lead + truth.fps), map_spec) == 99
        last = render_stream_frame(truth, lead + truth.n_frames)
        assert read_timer(last, map_spec) is None
        assert detect_banner(last, map_spec) is truth.outcome

    def test_truth_record_round_trip(self, rounds):
        truth = rounds[2]
        record = json.loads(json.dumps(truth.to_record("r00002")))
        assert record["duration_s"] == truth.duration_s
        assert GroundTruth.from_record(record) == truth
        frame = truth_renderer(record)(truth.lead_in_frames + 5)
        npt.assert_array_equal(frame, render_stream_frame(truth, truth.lead_in_frames + 5).pixels)


class TestDatasetStatistics:
    def test_duration_bucket(self):
        assert [duration_bucket(d) for d in (1, 24, 25, 49, 50, 75, 99, 100)] == [0, 0, 1, 1, 2, 3, 3, 3]

    def test_event_advantage_window(self, rounds):
        truth = rounds[0]

        def ev(t, team, kind):
            agent = "ash" if team is Team.ATTACKER else "frost"
            return EventLabel(timestamp=t, team=team, agent=agent, area="mid", kind=kind)

        events = [
            ev(10.0, Team.ATTACKER, EventKind.SKILL_USE),
            ev(30.0, Team.ATTACKER, EventKind.SKILL_USE),
            ev(31.0, Team.DEFENDER, EventKind.FOOTSTEP_HEARD),
            ev(40.0, Team.ATTACKER, EventKind.FOOTSTEP_HEARD),
            ev(50.0, Team.DEFENDER, EventKind.SKILL_USE),
            ev(60.0, Team.ATTACKER, EventKind.SPIKE_PLANT),
            ev(80.0, Team.DEFENDER, EventKind.SKILL_USE),
        ]
        assert event_advantage(truth.model_copy(update={"events": events})) == 0
        assert event_advantage(truth.model_copy(update={"events": events[:3]})) == 2


class TestGenerateDataset:
    def test_layout_and_manifest(self, synth_dataset):
        records = read_jsonl(synth_dataset / "rounds.jsonl")
        truths = read_jsonl(synth_dataset / "truth.jsonl")
        assert len(records) == len(truths) == 10
        info = json.loads((synth_dataset / "dataset.json").read_text())
        assert info["frame_format"] == "png"
        assert info["source"] == "synth"
        for record, truth in zip(records, truths):
            assert record["round_id"] == truth["round_id"]
            assert record["start_frame"] == truth["lead_in_frames"]
            assert record["end_frame"] - record["start_frame"] == truth["n_frames"]
            assert record["outcome"] == truth["outcome"]
            stream = synth_dataset / "frames" / record["round_id"]
            assert len(list(stream.glob("*.png"))) == truth["stream_frames"]

    def test_summary(self, synth_dataset):
        summary = json.loads((synth_dataset / SUMMARY_FILE).read_text())
        assert summary["n_rounds"] == 10
        assert sum(summary["duration_counts"]) == 10
        assert sum(summary["outcomes"].values()) == 10
        assert sum(summary["splits"].values()) == 10

    def test_splits_are_80_10_10(self, synth_dataset_noframes):
        store = get_round_store(synth_dataset_noframes)
        assert [len(store.rounds(s)) for s in (Split.TRAIN, Split.VAL, Split.TEST)] == [16, 2, 2]

    def test_thread_count_does_not_change_output(self, tmp_path):
        one = generate_dataset(SimConfig(seed=2), 3, tmp_path / "one", "none", threads=1)
        three = generate_dataset(SimConfig(seed=2), 3, tmp_path / "three", "none", threads=3)
        assert one == three
        for name in ("rounds.jsonl", "events.jsonl", "truth.jsonl", "summary.json"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()

    def test_zero_rounds(self, tmp_path):
        assert generate_dataset(SimConfig(), 0, tmp_path / "empty", "none") == []
        assert (tmp_path / "empty" / "rounds.jsonl").read_text() == ""

    def test_raw_frames_match_renderer(self, tmp_path):
        generate_dataset(SimConfig(seed=4), 1, tmp_path / "raw", FrameFormat.RGB)
        truth = GroundTruth.from_record(read_jsonl(tmp_path / "raw" / "truth.jsonl")[0])
        source = open_stream(tmp_path / "raw" / "frames" / "r00000.rgb")
        assert source.n_frames == truth.stream_frames
        npt.assert_array_equal(source.frame(7), render_stream_frame(truth, 7).pixels)

    def test_rendered_frames_on_demand(self, synth_dataset_noframes):
        store = get_round_store(synth_dataset_noframes, renderer=truth_renderer)
        record = store.rounds()[0]
        truth = GroundTruth.from_record(store.truth()[record.round_id])
        read = store.frame_reader(record)
        npt.assert_array_equal(read(0), render_stream_frame(truth, truth.lead_in_frames).pixels)
        npt.assert_array_equal(read(10 ** 6), read(record.n_frames - 1))


class TestExtractionFidelity:
    def test_extraction_recovers_rounds_and_events(self, synth_dataset, tmp_path, map_spec):
        out = tmp_path / "extracted"
        records = extract_dataset(synth_dataset / "frames", out, map_spec, VisionConfig(), threads=2)
        assert len(records) == 10
        score = score_extraction(out, synth_dataset)
        assert score.rounds_matched == 10
        assert score.boundaries_within_one_frame == 10
        assert score.outcomes_exact == 10
        assert score.event_f1 >= 0.95

    def test_timer_survives_pixel_noise(self, rounds, map_spec):
        truth = rounds[3]
        rng = np.random.default_rng(0)
        reads = exact = 0
        for frame in range(0, truth.n_frames, 3):
            pixels = render_stream_frame(truth, truth.lead_in_frames + frame).pixels.astype(np.float64)
            noisy = np.clip(pixels + rng.normal(0.0, 5.0, size=pixels.shape), 0, 255).astype(np.uint8)
            reads += 1
            exact += read_timer(noisy, map_spec) == 100 - frame // truth.fps
        assert exact / reads >= 0.99


@pytest.mark.slow
class TestMonteCarlo:
    def test_duel_odds_swap_with_mirrored_base_probability(self):
        rates = []
        for p0 in (0.3, 0.7):
            cfg = SimConfig(seed=1, p0=p0, numbers_bonus=0.0, skill_bonus=0.0, info_bonus=0.0)
            duels = [d for i in range(400) for d in simulate_round(cfg, derive_seed(cfg.seed, i)).duels]
            rates.append((sum(d.winner is Team.ATTACKER for d in duels) / len(duels), len(duels)))
        (low, n_low), (high, n_high) = rates
        sigma = np.sqrt(0.21 / n_low + 0.21 / n_high)
        assert abs(low + high - 1.0) <= 3 * sigma

    def test_event_advantage_shifts_outcomes(self, tmp_path):
        generate_dataset(SimConfig(seed=9), 5000, tmp_path, "none", threads=4)
        summary = json.loads((tmp_path / SUMMARY_FILE).read_text())
        assert summary["event_advantage"]["win_rate_shift"] >= 0.10
        assert sum(summary["duration_counts"]) == 5000
