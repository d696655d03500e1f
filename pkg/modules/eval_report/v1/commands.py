"""predict, eval and plot subcommands"""
import csv
import logging
import sys
from pathlib import Path
from typing import Dict, List

from core.errors import PipelineIOError
from core.minimap import Outcome
from core.round_store import Split
from core.settings import build_run_config, write_run_config
from core.tensor import as_tensor
from core.utils import predicted_class
from modules.spacetime_model.v1 import predict_proba
from modules.train_harness.v1 import Classifier, RoundData, load_checkpoint
from .metrics import DEFAULT_SAMPLE, ablation, evaluate_model, sample_rounds
from .report import ABLATION_CSV, emit_report, read_curve_csv, write_ablation_csv, write_svg

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    predict = subparsers.add_parser("predict", parents=parents, help="per-second predictions for one round")
    predict.add_argument("--model", required=True, help="checkpoint")
    predict.add_argument("--data", required=True, help="dataset directory")
    predict.add_argument("--round", dest="round_id", required=True, help="round id")
    predict.add_argument("--out", default=None, help="CSV file (stdout when omitted)")
    predict.set_defaults(handler=run_predict)

    evaluate = subparsers.add_parser("eval", parents=parents, help="accuracy report for one or more checkpoints")
    evaluate.add_argument("--model", action="append", required=True, help="checkpoint (repeat to compare)")
    evaluate.add_argument("--data", required=True, help="dataset directory")
    evaluate.add_argument("--split", choices=[s.value for s in Split], default=Split.TEST.value)
    evaluate.add_argument("--sample", type=int, default=DEFAULT_SAMPLE, help="rounds sampled; 0 evaluates all")
    evaluate.add_argument("--out", default="report", help="output directory")
    evaluate.add_argument("--ablation", action="store_true",
                          help="also re-evaluate event-fused models with each event kind removed")
    evaluate.set_defaults(handler=run_eval)

    plot = subparsers.add_parser("plot", parents=parents, help="curves.svg from curve CSVs")
    plot.add_argument("--curve", action="append", required=True, help="curve.csv (repeatable)")
    plot.add_argument("--out", default="curves.svg", help="SVG file")
    plot.set_defaults(handler=run_plot)


def _model_ids(paths: List[str], classifiers: List[Classifier]) -> List[str]:
    ids = ["Model B" if c.events_enabled else "Model A" for c in classifiers]
    return [f"{i} ({Path(p).stem})" if ids.count(i) > 1 else i for i, p in zip(ids, paths)]


def run_predict(args) -> int:
    run = build_run_config("predict", {"seed": args.seed, "threads": args.threads,
                                       "paths": {"model": args.model, "data": args.data}}, args.config)
    classifier = Classifier.from_checkpoint(load_checkpoint(Path(run.paths["model"])))
    data = RoundData.load(Path(run.paths["data"]))
    record = data.store.get(args.round_id)
    seconds = list(range(1, record.duration_s + 1))
    logits = classifier.predict_logits(data.reader(record), data.events_for(record), seconds, threads=run.threads)
    probs = predict_proba(as_tensor(logits))

    rows = [
        [t, repr(float(p[0])), repr(float(p[1])), Outcome.from_label(predicted_class(row)).value]
        for t, p, row in zip(seconds, probs, logits)
    ]
    header = ["t", "p_attacker_win", "p_defender_win", "predicted"]
    if args.out:
        try:
            with open(args.out, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                writer.writerows(rows)
        except OSError as e:
            raise PipelineIOError(f"cannot write {args.out}: {e}")
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    logger.info(f"Round {record.round_id}: {len(rows)} predictions, outcome {record.outcome.value}")
    return 0


def run_eval(args) -> int:
    run = build_run_config("eval", {"seed": args.seed, "threads": args.threads,
                                    "paths": {"data": args.data, "out": args.out}}, args.config)
    data = RoundData.load(Path(run.paths["data"]))
    records = sample_rounds(data.require_split(Split(args.split)), args.sample or None, run.seed)
    classifiers = [Classifier.from_checkpoint(load_checkpoint(Path(p))) for p in args.model]
    out_dir = Path(run.paths["out"])

    reports = [
        evaluate_model(c, data, records, model_id, run.threads)
        for c, model_id in zip(classifiers, _model_ids(args.model, classifiers))
    ]
    emit_report(reports, out_dir)
    if args.ablation:
        for classifier, report in zip(classifiers, reports):
            if classifier.events_enabled:
                ablated = ablation(classifier, data, records, report.model_id, run.threads)
                write_ablation_csv(out_dir / ABLATION_CSV, report, ablated)
                break
    write_run_config(run, out_dir)
    for report in reports:
        print(f"{report.model_id}: overall {100 * report.overall:.2f}%")
    return 0


def run_plot(args) -> int:
    curves: Dict[str, List[float]] = {}
    for path in args.curve:
        curves.update(read_curve_csv(Path(path)))
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise PipelineIOError(f"cannot create {out.parent}: {e}")
    write_svg(out, curves)
    print(f"{len(curves)} curves plotted to {out}")
    return 0
