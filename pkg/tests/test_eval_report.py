"""Accuracy curves, bucket averages and report files"""
import csv
import json
from xml.etree import ElementTree

import numpy as np
import pytest

from core.errors import EmptySetError
from core.minimap import EventKind, EventLabel, Outcome, Team
from core.round_store import Split
from core.utils import per_second_counts, predicted_class, predicted_classes
from modules.event_fusion.v1 import EventVocab
from modules.eval_report.v1 import (
    CURVE_CSV,
    CURVE_GID_PREFIX,
    CURVES_SVG,
    REPORT_CSV,
    REPORT_JSON,
    ablation,
    accuracy_curve,
    bucket_of,
    emit_report,
    evaluate_model,
    read_curve_csv,
    render_svg,
    report_from_published,
    sample_rounds,
    table_row,
    without_kind,
    write_ablation_csv
)
from modules.spacetime_model.v1 import init_weights
from modules.train_harness.v1 import Classifier, RoundData

ATK, DEF = Outcome.ATTACKER_WIN, Outcome.DEFENDER_WIN
SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def toy():
    predictions = {"r1": [0, 0], "r2": [0, 1], "r3": [1, 1, 0]}
    outcomes = {"r1": ATK, "r2": DEF, "r3": ATK}
    return predictions, outcomes


def test_ties_go_to_defender():
    assert predicted_class([0.3, 0.3]) == 1
    assert predicted_class([0.4, 0.3]) == 0
    assert predicted_classes(np.array([[1.0, 1.0], [2.0, -1.0], [0.0, 5.0]])).tolist() == [1, 0, 1]


def test_per_second_counts(toy):
    predictions, outcomes = toy
    correct, alive = per_second_counts(list(predictions.values()), list(outcomes.values()))
    assert alive == [3, 3, 1]
    assert correct == [1, 2, 1]


def test_accuracy_curve_over_rounds_in_progress(toy):
    predictions, outcomes = toy
    report = accuracy_curve(predictions, outcomes, "toy")
    assert report.curve == pytest.approx([1 / 3, 2 / 3, 1.0])
    assert [s.alive for s in report.per_second] == [3, 3, 1]
    assert report.overall == pytest.approx(2 / 3)
    assert report.buckets[0] == pytest.approx(2 / 3)
    assert report.buckets[1:] == [None, None, None]
    assert report.n_rounds == 3
    assert report.mean_from(3) == pytest.approx(1.0)
    assert report.mean_from(30) is None


def test_accuracy_curve_rejects_empty_set():
    with pytest.raises(EmptySetError):
        accuracy_curve({}, {}, "none")


def test_bucket_edges():
    assert [bucket_of(t) for t in (1, 24, 25, 49, 50, 74, 75, 99, 100)] == [0, 0, 1, 1, 2, 2, 3, 3, 3]


def test_published_row():
    report = report_from_published("Model B", 80.55, [56.32, 85.80, 90.64, 89.44])
    assert ",".join(table_row(report)) == "Model B,80.55,56.32,85.80,90.64,89.44"
    with pytest.raises(ValueError):
        report_from_published("Model B", 80.55, [56.32])


def test_emit_report_files(toy, tmp_path):
    predictions, outcomes = toy
    model_a = accuracy_curve(predictions, outcomes, "A")
    model_b = accuracy_curve({"r1": [0, 0], "r2": [1, 1], "r3": [0, 0, 0]}, outcomes, "B")
    written = emit_report([model_a, model_b], tmp_path)
    assert [p.name for p in written] == [REPORT_CSV, CURVE_CSV, CURVES_SVG, REPORT_JSON]

    with open(tmp_path / CURVE_CSV, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "acc_A", "acc_B", "alive", "gap"]
    assert rows[3][3] == "1"
    assert float(rows[1][4]) == pytest.approx(2 / 3)

    curves = read_curve_csv(tmp_path / CURVE_CSV)
    assert curves["A"] == pytest.approx(model_a.curve)
    assert curves["B"] == pytest.approx([1.0, 1.0, 1.0])

    payload = json.loads((tmp_path / REPORT_JSON).read_text())
    assert [m["model"] for m in payload["models"]] == ["A", "B"]
    assert payload["models"][0]["buckets"]["0-24"] == pytest.approx(2 / 3)


def test_published_reports_skip_curves(tmp_path):
    written = emit_report([report_from_published("Model A", 73.7, [52.7, 76.5, 84.6, 86.1])], tmp_path)
    assert [p.name for p in written] == [REPORT_CSV, REPORT_JSON]
    with pytest.raises(EmptySetError):
        emit_report([], tmp_path)


def _curve_vertices(svg: str) -> dict:
    """curve group id -> number of vertices in its path"""
    root = ElementTree.fromstring(svg.encode("utf-8"))
    curves = {}
    for group in root.iter(SVG_NS + "g"):
        if (group.get("id") or "").startswith(CURVE_GID_PREFIX):
            d = group.find(SVG_NS + "path").get("d")
            curves[group.get("id")] = sum(token in ("M", "L") for token in d.split())
    return curves


def test_svg_draws_one_line_per_model():
    svg = render_svg({"A": [0.5, 0.6, 0.7], "B": [0.4, 0.9]})
    assert _curve_vertices(svg) == {"curve_A": 3, "curve_B": 2}
    assert svg == render_svg({"A": [0.5, 0.6, 0.7], "B": [0.4, 0.9]})


def test_ablation_csv(toy, tmp_path):
    predictions, outcomes = toy
    full = accuracy_curve(predictions, outcomes, "B")
    worse = full.model_copy(update={"model_id": "B without footstep_heard", "overall": full.overall - 0.1})
    write_ablation_csv(tmp_path / "ablation.csv", full, [worse])
    with open(tmp_path / "ablation.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0][-1] == "overall_drop"
    assert rows[1][-1] == "0.00"
    assert rows[2][-1] == "10.00"


def test_without_kind():
    events = [EventLabel(timestamp=1.0, team=Team.ATTACKER, agent="ash", area="mid", kind=k) for k in EventKind]
    assert [e.kind for e in without_kind(events, EventKind.SKILL_USE)] == [EventKind.FOOTSTEP_HEARD,
                                                                          EventKind.SPIKE_PLANT]
    assert without_kind(events, None) == events


def test_sample_rounds_is_seeded(synth_dataset_noframes):
    records = RoundData.load(synth_dataset_noframes).rounds()
    assert [r.round_id for r in sample_rounds(records, 5, seed=1)] == \
        [r.round_id for r in sample_rounds(list(reversed(records)), 5, seed=1)]
    assert len(sample_rounds(records, None)) == len(records)
    assert len(sample_rounds(records, 100)) == len(records)


def test_evaluate_untrained_models(synth_dataset_noframes, tiny_model_cfg, tmp_path):
    data = RoundData.load(synth_dataset_noframes)
    records = sample_rounds(data.rounds(Split.TEST), 2)
    model_a = Classifier(init_weights(tiny_model_cfg, 0), tiny_model_cfg)
    report = evaluate_model(model_a, data, records, "Model A", threads=2)
    assert report.n_rounds == 2
    assert len(report.per_second) == max(r.duration_s for r in records)
    assert report.per_second[0].alive == 2

    weights = init_weights(tiny_model_cfg, 0, events_enabled=True, map_spec=data.map_spec)
    model_b = Classifier(weights, tiny_model_cfg, EventVocab.for_map(data.map_spec))
    reports = ablation(model_b, data, records[:1], "Model B")
    assert [r.model_id for r in reports] == [f"Model B without {k.value}" for k in EventKind]
    with pytest.raises(EmptySetError):
        evaluate_model(model_a, data, [], "Model A")
