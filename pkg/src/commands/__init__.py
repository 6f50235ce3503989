# File: src/commands/__init__.py

from types import ModuleType
from typing import Dict

from src.commands import analyze, build_models, estimate, gen, ingest, simulate
from src.utils.errors import UsageError

# Pipeline order: ingest -> analyze / estimate -> build-models -> gen -> simulate
COMMANDS: Dict[str, ModuleType] = {
    "ingest": ingest,
    "analyze": analyze,
    "estimate": estimate,
    "build-models": build_models,
    "gen": gen,
    "simulate": simulate,
}


def run_command(name: str, args) -> None:
    if name not in COMMANDS:
        raise UsageError(f"Command '{name}' not found in COMMANDS.")
    COMMANDS[name].run(args)
