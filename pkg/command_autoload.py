"""
Command auto-loader for pipeline stages.
Scans modules/ folder and registers every stage's subcommands.
"""
import argparse
import importlib
import logging
from pathlib import Path
from typing import Dict, List

logger = logging.getLogger(__name__)


def discover_modules(base_path: Path) -> Dict[str, str]:
    """
    Discover all modules with commands.py in modules/ folder.

    Returns:
        dict: {module_name: module_path}
    """
    modules = {}

    if not base_path.exists():
        logger.warning(f"Modules folder not found: {base_path}")
        return modules

    # Scan for module/version/commands.py pattern
    for module_dir in sorted(base_path.iterdir()):
        if not module_dir.is_dir() or module_dir.name.startswith("_"):
            continue

        for version_dir in sorted(module_dir.iterdir()):
            if version_dir.is_dir() and version_dir.name.startswith("v"):
                if (version_dir / "commands.py").exists():
                    module_name = f"{module_dir.name}_{version_dir.name}"
                    modules[module_name] = f"modules.{module_dir.name}.{version_dir.name}.commands"
                    logger.debug(f"Discovered module: {module_name}")

    return modules


def autoload_commands(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> int:
    """
    Register all module subcommands on an argparse subparser set.

    Args:
        subparsers: Target of add_parser()
        parents: Parsers holding the shared flags (--seed, --threads, ...)

    Returns:
        Number of modules registered
    """
    base_path = Path(__file__).parent / "modules"
    loaded = 0
    for module_name, module_path in discover_modules(base_path).items():
        module = importlib.import_module(module_path)
        if not hasattr(module, "register"):
            logger.warning(f"Module {module_path} has no 'register' function")
            continue
        module.register(subparsers, parents)
        loaded += 1
        logger.debug(f"Registered commands: {module_name}")
    return loaded
