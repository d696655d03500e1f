"""
MINIMAP ORACLE - round-outcome prediction from minimap footage
Command-line entry point with auto-loading of pipeline stage commands
"""
import argparse
import json
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from core.errors import PipelineError
from core.settings import log_level

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def error_line(code: str, message: str) -> None:
    """Machine-readable error on stderr"""
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that also reports usage errors as a JSON line"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        error_line("invalid_arguments", message)
        sys.exit(EXIT_USAGE)


def common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=None, help="run seed (default 0)")
    parent.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $MINIMAP_ORACLE_THREADS or logical cores)")
    parent.add_argument("--config", default=None, help="TOML or JSON settings file")
    parent.add_argument("--verbose", action="store_true", help="debug logging")
    return parent


def build_parser() -> argparse.ArgumentParser:
    from command_autoload import autoload_commands

    parser = ArgumentParser(
        prog="minimap-oracle",
        description="Round-outcome prediction from minimap frames and tactical events"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=ArgumentParser)
    subparsers.required = True
    autoload_commands(subparsers, [common_flags()])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 on runtime failure, 2 on invalid arguments or settings
    """
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=log_level(args.verbose),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True
    )
    logger.info(f"=== {args.command} ===")

    try:
        code = args.handler(args)
    except ValidationError as e:
        error_line("invalid_config", str(e).replace("\n", "; "))
        return EXIT_USAGE
    except PipelineError as e:
        logger.error(f"{args.command} failed: {e}")
        error_line(e.code, str(e))
        return EXIT_RUNTIME
    except (KeyError, ValueError) as e:
        error_line("invalid_arguments", str(e))
        return EXIT_USAGE

    logger.info(f"=== {args.command} finished (exit {code}) ===")
    return code


if __name__ == "__main__":
    sys.exit(main())
