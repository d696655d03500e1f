"""Map layout, event labels and the shared footstep rule"""
import json

import numpy as np
import pytest

from core.errors import PipelineIOError, UnmappedPositionError
from core.minimap import (
    ROSTER,
    Area,
    EventKind,
    EventLabel,
    FrameImage,
    MapSpec,
    Outcome,
    Team,
    build_default_map,
    footstep_events,
    format_timer,
    get_map,
    get_map_registry,
    nearest_agent,
    resolve_area,
    rising_edges,
    sort_events
)


def test_default_map_tiles_the_playfield(map_spec):
    assert map_spec.map_id == "foundry"
    assert sum(a.pixel_area for a in map_spec.areas) == 128 * (128 - 16)
    assert map_spec.locate(10, 50).name == "site_a"
    assert map_spec.locate(47, 50).name == "site_a"
    assert map_spec.locate(48, 50).name == "mid"
    assert map_spec.neighbours("mid") == ["connector", "def_spawn", "site_a", "site_b"]


def test_hud_strip_is_unmapped(map_spec):
    with pytest.raises(UnmappedPositionError):
        map_spec.locate(10, 5)
    assert resolve_area(map_spec, 10, 5).name == "def_spawn"


def test_map_validation():
    base = build_default_map().model_dump()
    overlapping = {**base, "areas": base["areas"] + [{"name": "extra", "x0": 0, "y0": 16, "x1": 4, "y1": 20}]}
    with pytest.raises(ValueError):
        MapSpec(**overlapping)
    with pytest.raises(ValueError):
        MapSpec(**{**base, "areas": base["areas"][:-1]})
    with pytest.raises(ValueError):
        MapSpec(**{**base, "links": [("mid", "nowhere")]})
    with pytest.raises(ValueError):
        Area(name="empty", x0=3, y0=0, x1=3, y1=10)


def test_registry_loads_map_files(tmp_path):
    layout = build_default_map().model_dump(mode="json")
    layout["map_id"] = "foundry_copy"
    (tmp_path / "map.json").write_text(json.dumps(layout))
    loaded = get_map_registry().load_file(tmp_path / "map.json")
    assert get_map("foundry_copy") is loaded
    assert loaded.spec_hash() != get_map().spec_hash()
    with pytest.raises(PipelineIOError):
        get_map_registry().load_file(tmp_path / "missing.json")
    with pytest.raises(KeyError):
        get_map("nonexistent")


def test_event_record_round_trip():
    event = EventLabel(timestamp=2.125, team=Team.DEFENDER, agent="frost", area="mid",
                       kind=EventKind.FOOTSTEP_HEARD)
    record = event.to_record()
    assert record == {"t": 2.125, "team": "DEF", "agent": "frost", "area": "mid", "kind": "footstep_heard"}
    assert EventLabel.from_record(record) == event
    assert event.frame_index(8) == 17


def test_outcome_labels_and_roster():
    assert [Outcome.ATTACKER_WIN.label, Outcome.DEFENDER_WIN.label] == [0, 1]
    assert Outcome.from_label(1) is Outcome.DEFENDER_WIN
    assert Team.ATTACKER.opponent is Team.DEFENDER
    assert sorted(t.value for t in set(ROSTER.values())) == ["ATK", "DEF"]
    assert sum(t is Team.ATTACKER for t in ROSTER.values()) == 5


def test_frame_image_validation():
    FrameImage(width=4, height=2, pixels=np.zeros((2, 4, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        FrameImage(width=4, height=2, pixels=np.zeros((2, 4, 3), dtype=np.float64))
    with pytest.raises(ValueError):
        FrameImage(width=2, height=4, pixels=np.zeros((2, 4, 3), dtype=np.uint8))


def test_footsteps_need_speed_and_a_listener(map_spec):
    tracks = {"ash": [(20 + 2 * f, 50) for f in range(16)], "frost": [(30, 55)] * 16}
    events = footstep_events(tracks, map_spec, fps=8, radius=24.0, v_min=1.0)
    assert [(e.timestamp, e.agent, e.area) for e in events] == [(0.5, "ash", "site_a"), (1.0, "ash", "site_a")]
    assert all(e.team is Team.ATTACKER for e in events)
    assert footstep_events(tracks, map_spec, fps=8, radius=24.0, v_min=3.0) == []
    assert footstep_events(tracks, map_spec, fps=8, radius=24.0, v_min=1.0, end_frame=8) == events[:1]


def test_footsteps_ignore_absent_listeners(map_spec):
    tracks = {"ash": [(20 + 2 * f, 50) for f in range(16)], "frost": [None] * 16}
    assert footstep_events(tracks, map_spec, fps=8, radius=24.0, v_min=1.0) == []


def test_small_helpers():
    assert rising_edges([True, True, False, True, False]) == [0, 3]
    assert nearest_agent((0, 0), {"b": (3, 4), "a": (4, 3), "c": (10, 0)}) == "a"
    assert nearest_agent((0, 0), {}) is None
    assert format_timer(100) == "1:40"
    assert format_timer(9) == "0:09"


def test_sort_events_orders_by_time_kind_agent():
    def ev(t, kind, agent):
        return EventLabel(timestamp=t, team=ROSTER[agent], agent=agent, area="mid", kind=kind)

    events = [ev(1.0, EventKind.SPIKE_PLANT, "ash"), ev(1.0, EventKind.FOOTSTEP_HEARD, "frost"), ev(0.5, EventKind.SKILL_USE, "ash")]
    assert [e.timestamp for e in sort_events(events)] == [0.5, 1.0, 1.0]
    assert sort_events(events)[1].kind is EventKind.FOOTSTEP_HEARD
