"""gradcheck subcommand"""
import logging

from core.settings import build_run_config
from .config import MODEL_PRESETS, model_preset
from .gradcheck import model_grad_check

logger = logging.getLogger(__name__)

TOLERANCE = 1e-4


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser("gradcheck", parents=parents,
                                   help="finite-difference check of the full fused model")
    parser.add_argument("--preset", choices=list(MODEL_PRESETS), default=None, help="model preset (default desk)")
    parser.add_argument("--entries", type=int, default=4, help="entries checked per tensor; 0 checks all")
    parser.add_argument("--events", choices=["on", "off"], default="on", help="include event fusion")
    parser.set_defaults(handler=run_gradcheck)


def run_gradcheck(args) -> int:
    run = build_run_config("gradcheck", {"seed": args.seed, "threads": args.threads, "preset": args.preset},
                           args.config)
    cfg = model_preset(run.preset.value, **run.model)
    error = model_grad_check(cfg, run.seed, args.events == "on", entries_per_param=args.entries or None)
    print(f"max relative error {error:.3e}")
    if error > TOLERANCE:
        logger.error(f"Gradient check failed: {error:.3e} > {TOLERANCE:.0e}")
        return 1
    return 0
