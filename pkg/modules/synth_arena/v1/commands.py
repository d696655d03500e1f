"""synth subcommand"""
import logging
from pathlib import Path

from core.round_store import FrameFormat
from core.settings import build_run_config, write_run_config
from .dataset import generate_dataset
from .models import SimConfig

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("synth", parents=parents, help="simulate and render a labeled round set")
    parser.add_argument("--rounds", type=int, required=True, help="number of rounds")
    parser.add_argument("--out", required=True, help="dataset directory")
    parser.add_argument("--frames", choices=[f.value for f in FrameFormat], default=None,
                        help="frame storage (default png; none re-renders from truth.jsonl)")
    parser.add_argument("--map", dest="map_id", default=None, help="map id")
    parser.set_defaults(handler=run_synth)


def run_synth(args) -> int:
    if args.rounds < 0:
        raise ValueError("--rounds must be non-negative")
    run = build_run_config("synth", {
        "seed": args.seed,
        "threads": args.threads,
        "sim": {"map_id": args.map_id},
        "paths": {"out": args.out, "frames": args.frames},
    }, args.config)
    cfg = SimConfig(**{**run.sim, "seed": run.seed})
    frame_format = FrameFormat(run.paths.get("frames") or FrameFormat.PNG)
    out_dir = Path(run.paths["out"])
    records = generate_dataset(cfg, args.rounds, out_dir, frame_format, run.threads)
    write_run_config(run, out_dir)
    print(f"{len(records)} rounds written to {out_dir}")
    return 0
