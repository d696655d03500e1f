"""
Directional replication on the desk preset: the event-fused model has to beat
the vision-only model overall and in every bucket after the first 25 seconds.

Trains two desk-sized models from scratch on 2500 simulated rounds; run with
--runslow and expect hours on a CPU.
"""
import json

import pytest

from main import EXIT_OK, main

ROUNDS = 2500
LATE_BUCKETS = ["25-49", "50-74", "75-99"]


@pytest.mark.slow
def test_event_fusion_beats_vision_only(tmp_path):
    data = str(tmp_path / "data")
    assert main(["synth", "--rounds", str(ROUNDS), "--out", data, "--frames", "none"]) == EXIT_OK
    for name, events in (("a", "off"), ("b", "on")):
        assert main(["train", "--data", data, "--out", str(tmp_path / name), "--events", events,
                     "--preset", "desk"]) == EXIT_OK

    report = tmp_path / "report"
    assert main(["eval", "--model", str(tmp_path / "a" / "best.ckpt"), "--model", str(tmp_path / "b" / "best.ckpt"),
                 "--data", data, "--sample", "100", "--out", str(report)]) == EXIT_OK
    models = {m["model"]: m for m in json.loads((report / "report.json").read_text())["models"]}
    model_a, model_b = models["Model A"], models["Model B"]

    assert model_b["overall"] - model_a["overall"] >= 0.05
    for label in LATE_BUCKETS:
        assert model_b["buckets"][label] >= model_a["buckets"][label], label
