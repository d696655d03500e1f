"""
Report files: report.csv (one row per model), curve.csv (per-second
accuracy), curves.svg (line chart), report.json and ablation.csv.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.errors import EmptySetError, PipelineIOError
from .models import BUCKET_LABELS, LATE_ROUND_START_S, AccuracyReport

logger = logging.getLogger(__name__)

REPORT_CSV = "report.csv"
CURVE_CSV = "curve.csv"
CURVES_SVG = "curves.svg"
REPORT_JSON = "report.json"
ABLATION_CSV = "ablation.csv"

REPORT_HEADER = ["model", "overall"] + BUCKET_LABELS

CURVE_GID_PREFIX = "curve_"
FIGSIZE = (8.0, 4.5)
COLOURS = ["#d1495b", "#00798c", "#edae49", "#66a182", "#2e4057"]
SVG_RC = {
    "svg.hashsalt": "minimap-oracle",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "path.simplify": False
}


def _percent(value: Optional[float]) -> str:
    return "" if value is None else f"{100.0 * value:.2f}"


def table_row(report: AccuracyReport) -> List[str]:
    """Table layout: model, overall, four buckets, percent with two decimals"""
    return [report.model_id, _percent(report.overall)] + [_percent(b) for b in report.buckets]


def report_from_published(model_id: str, overall_pct: float, bucket_pcts: Sequence[float]) -> AccuracyReport:
    """AccuracyReport holding externally published percentages (no per-second data)"""
    if len(bucket_pcts) != len(BUCKET_LABELS):
        raise ValueError(f"expected {len(BUCKET_LABELS)} bucket values, got {len(bucket_pcts)}")
    return AccuracyReport(
        model_id=model_id,
        overall=overall_pct / 100.0,
        buckets=[b / 100.0 for b in bucket_pcts]
    )


def _open(path: Path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise PipelineIOError(f"cannot write {path}: {e}")


def write_report_csv(path: Path, reports: Sequence[AccuracyReport]) -> None:
    with _open(path) as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_HEADER)
        for report in reports:
            writer.writerow(table_row(report))


def write_curve_csv(path: Path, reports: Sequence[AccuracyReport]) -> None:
    """t, acc_<model>..., alive (from the first report), gap (last minus first when two or more)"""
    horizon = max(s.t for r in reports for s in r.per_second)
    columns = [{s.t: s for s in r.per_second} for r in reports]
    header = ["t"] + [f"acc_{r.model_id}" for r in reports] + ["alive"]
    if len(reports) > 1:
        header.append("gap")
    with _open(path) as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for t in range(1, horizon + 1):
            values = [columns[i][t].accuracy if t in columns[i] else None for i in range(len(reports))]
            first = columns[0].get(t)
            row = [t] + ["" if v is None else repr(v) for v in values] + [first.alive if first else 0]
            if len(reports) > 1:
                row.append("" if values[0] is None or values[-1] is None else repr(values[-1] - values[0]))
            writer.writerow(row)


def read_curve_csv(path: Path) -> Dict[str, List[float]]:
    """model id -> per-second accuracy (in t order) from a curve.csv"""
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    except OSError as e:
        raise PipelineIOError(f"cannot read {path}: {e}")
    if not rows:
        raise EmptySetError(f"{path} holds no rows")
    curves: Dict[str, List[float]] = {}
    for column in rows[0]:
        if column.startswith("acc_"):
            curves[column[len("acc_"):]] = [float(r[column]) for r in rows if r[column] != ""]
    return curves


def render_svg(curves: Dict[str, List[float]], title: str = "Prediction accuracy") -> str:
    """
    Line chart of accuracy (0..1) against seconds, one line per model.

    Each line carries the SVG id ``curve_<model id>`` and keeps one vertex per
    second. Output is byte-stable for equal input (fixed hash salt, no date
    metadata).
    """
    with matplotlib.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=FIGSIZE)
        for i, (model_id, curve) in enumerate(curves.items()):
            (line,) = ax.plot(range(1, len(curve) + 1), curve, color=COLOURS[i % len(COLOURS)],
                              linewidth=1.5, label=model_id)
            line.set_gid(f"{CURVE_GID_PREFIX}{model_id}")
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("second of round")
        ax.set_ylabel("accuracy")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        if curves:
            ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buffer.getvalue()


def write_svg(path: Path, curves: Dict[str, List[float]]) -> None:
    with _open(path) as f:
        f.write(render_svg(curves))


def report_payload(report: AccuracyReport) -> dict:
    return {
        "model": report.model_id,
        "n_rounds": report.n_rounds,
        "overall": report.overall,
        "buckets": dict(zip(BUCKET_LABELS, report.buckets)),
        f"mean_from_{LATE_ROUND_START_S}s": report.mean_from(LATE_ROUND_START_S),
        "per_second": [{"t": s.t, "alive": s.alive, "accuracy": s.accuracy} for s in report.per_second]
    }


def emit_report(reports: Sequence[AccuracyReport], out_dir: Path) -> List[Path]:
    """
    Write report.csv, curve.csv, curves.svg and report.json.

    Args:
        reports: One report per model, all over the same round set
        out_dir: Output directory

    Returns:
        Paths written

    Raises:
        EmptySetError: no reports or a report without per-second data
        PipelineIOError: out_dir cannot be written
    """
    if not reports:
        raise EmptySetError("no reports to emit")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise PipelineIOError(f"cannot create {out_dir}: {e}")
    written = [out_dir / REPORT_CSV]
    write_report_csv(written[0], reports)
    if all(r.per_second for r in reports):
        write_curve_csv(out_dir / CURVE_CSV, reports)
        write_svg(out_dir / CURVES_SVG, {r.model_id: r.curve for r in reports})
        written += [out_dir / CURVE_CSV, out_dir / CURVES_SVG]
    try:
        with open(out_dir / REPORT_JSON, "w", encoding="utf-8") as f:
            json.dump({"models": [report_payload(r) for r in reports]}, f, indent=2)
    except OSError as e:
        raise PipelineIOError(f"cannot write {out_dir / REPORT_JSON}: {e}")
    written.append(out_dir / REPORT_JSON)
    logger.info(f"Report written to {out_dir}: {', '.join(p.name for p in written)}")
    return written


def write_ablation_csv(path: Path, full: AccuracyReport, ablated: Sequence[AccuracyReport]) -> None:
    """One row per removed event kind with its overall drop against the full model"""
    with _open(path) as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_HEADER + ["overall_drop"])
        writer.writerow(table_row(full) + [_percent(0.0)])
        for report in ablated:
            writer.writerow(table_row(report) + [_percent(full.overall - report.overall)])
