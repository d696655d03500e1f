"""extract subcommand"""
import json
import logging
from pathlib import Path

from core.minimap import get_map, get_map_registry
from core.settings import build_run_config, write_run_config
from .config import VisionConfig
from .pipeline import extract_dataset
from .scoring import score_extraction

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("extract", parents=parents,
                                   help="segment frame streams into rounds and infer events from pixels")
    parser.add_argument("--frames", required=True, help="directory of PNG frame directories or .rgb streams")
    parser.add_argument("--out", required=True, help="output dataset directory")
    parser.add_argument("--map", dest="map_id", default=None, help="map id (default built-in map)")
    parser.add_argument("--map-file", default=None, help="JSON map layout to register first")
    parser.add_argument("--score-against", default=None,
                        help="synthetic dataset directory to score the extraction against")
    parser.set_defaults(handler=run_extract)


def run_extract(args) -> int:
    run = build_run_config("extract", {
        "seed": args.seed,
        "threads": args.threads,
        "paths": {"frames": args.frames, "out": args.out, "map_file": args.map_file},
        "vision": {},
    }, args.config)
    if run.paths.get("map_file"):
        map_spec = get_map_registry().load_file(Path(run.paths["map_file"]))
    else:
        map_spec = get_map(args.map_id) if args.map_id else get_map()
    cfg = VisionConfig(**run.vision)
    out_dir = Path(run.paths["out"])
    records = extract_dataset(Path(run.paths["frames"]), out_dir, map_spec, cfg, run.threads, run.seed)
    write_run_config(run, out_dir)
    print(f"{len(records)} rounds extracted to {out_dir}")

    if args.score_against:
        score = score_extraction(out_dir, Path(args.score_against))
        print(json.dumps({**score.model_dump(), "event_f1": score.event_f1}, sort_keys=True))
    return 0
