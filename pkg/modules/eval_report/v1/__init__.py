"""Eval report v1: per-second accuracy curves, bucket averages and report files"""
from .models import BUCKET_LABELS, LATE_ROUND_START_S, AccuracyReport, SecondAccuracy, bucket_of
from .metrics import (
    DEFAULT_SAMPLE,
    ablation,
    accuracy_curve,
    evaluate_model,
    predict_round,
    predict_rounds,
    sample_rounds,
    without_kind
)
from .report import (
    ABLATION_CSV,
    CURVE_CSV,
    CURVE_GID_PREFIX,
    CURVES_SVG,
    REPORT_CSV,
    REPORT_JSON,
    emit_report,
    read_curve_csv,
    render_svg,
    report_from_published,
    table_row,
    write_ablation_csv,
    write_svg
)

__all__ = [
    "BUCKET_LABELS",
    "LATE_ROUND_START_S",
    "AccuracyReport",
    "SecondAccuracy",
    "bucket_of",
    "DEFAULT_SAMPLE",
    "ablation",
    "accuracy_curve",
    "evaluate_model",
    "predict_round",
    "predict_rounds",
    "sample_rounds",
    "without_kind",
    "ABLATION_CSV",
    "CURVE_CSV",
    "CURVE_GID_PREFIX",
    "CURVES_SVG",
    "REPORT_CSV",
    "REPORT_JSON",
    "emit_report",
    "read_curve_csv",
    "render_svg",
    "report_from_published",
    "table_row",
    "write_ablation_csv",
    "write_svg"
]
