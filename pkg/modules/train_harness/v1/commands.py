"""train subcommand"""
import json
import logging
from pathlib import Path

from core.settings import build_run_config, write_run_config
from modules.spacetime_model.v1 import MODEL_PRESETS, model_preset
from .checkpoint import load_checkpoint
from .config import train_preset
from .data import RoundData
from .trainer import train

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("train", parents=parents, help="train Model A (--events off) or Model B (--events on)")
    parser.add_argument("--data", required=True, help="dataset directory (synth or extract output)")
    parser.add_argument("--out", required=True, help="output directory for checkpoints and history.csv")
    parser.add_argument("--events", choices=["on", "off"], default="off", help="fuse tactical events (Model B)")
    parser.add_argument("--preset", choices=list(MODEL_PRESETS), default=None, help="model and recipe scale")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None, help="peak learning rate")
    parser.add_argument("--patience", type=int, default=None)
    parser.add_argument("--resume", default=None, help="continue from a last.ckpt of the same configuration")
    parser.set_defaults(handler=run_train)


def run_train(args) -> int:
    run = build_run_config("train", {
        "seed": args.seed,
        "threads": args.threads,
        "preset": args.preset,
        "train": {
            "events_enabled": args.events == "on",
            "epochs": args.epochs,
            "batch_size": args.batch_size,
            "lr_max": args.lr,
            "patience": args.patience,
        },
        "paths": {"data": args.data, "out": args.out},
    }, args.config)
    model_cfg = model_preset(run.preset.value, **run.model)
    train_cfg = train_preset(run.preset.value, **{**run.train, "seed": run.seed})
    out_dir = Path(run.paths["out"])
    data = RoundData.load(Path(run.paths["data"]))
    resume = load_checkpoint(Path(args.resume)) if args.resume else None

    result = train(data, model_cfg, train_cfg, out_dir, run.threads, resume)
    write_run_config(run, out_dir)
    print(json.dumps(result.model_dump(exclude={"history"}), sort_keys=True))
    return 0
