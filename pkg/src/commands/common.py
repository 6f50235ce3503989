# File: src/commands/common.py

"""
Plumbing shared by the CLI verbs: layered settings (config.py defaults, a
key = value file, then flags), snapshot loading and atomic outputs recorded
in the run manifest.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values

import src.config as config
from src.fetching.checkin_store import SocialGraph
from src.utils.errors import UsageError
from src.utils.files import RunManifest, atomic_write_bytes, read_input

logger = logging.getLogger(__name__)


def _flag(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


# key -> (type, default). Keys of the simulation block follow the
# "Simulation Details" parameter names.
SETTINGS: Dict[str, tuple] = {
    "simulation_time": (float, config.SIM_DURATION),
    "width": (float, config.SIM_WIDTH),
    "length": (float, config.SIM_HEIGHT),
    "nodes": (int, None),
    "radio_range": (float, config.SIM_RADIO_RANGE),
    "tick": (float, config.SIM_TICK),
    "grid_rows": (int, config.SIM_GRID_ROWS),
    "grid_cols": (int, config.SIM_GRID_COLS),
    "seed": (int, config.DEFAULT_SEED),
    "contention": (str, "components"),
    "min_speed": (float, config.RWP_MIN_SPEED),
    "max_speed": (float, config.RWP_MAX_SPEED),
    "pause_time": (float, config.RWP_PAUSE_TIME),
    "fmm_speed": (float, config.FMM_SPEED),
    "fmm_min_speed": (float, config.FMM_MIN_SPEED),
    "fmm_max_speed": (float, config.FMM_MAX_SPEED),
    "max_gap": (float, config.FMM_MAX_GAP_S),
    "dwell": (float, config.FMM_DWELL_S),
    "speed_policy": (str, "fixed"),
    "start": (str, "uniform"),
    "merge_radius": (float, config.MERGE_RADIUS_M),
    "preserve_scale": (_flag, False),
    "pair_count": (int, config.CURVE_PAIR_COUNT),
    "bins": (str, ",".join(f"{edge:g}" for edge in config.CURVE_BIN_EDGES)),
    "time_epsilon": (float, config.MATCH_TIME_EPSILON_S),
    "space_epsilon": (float, config.MATCH_SPACE_EPSILON_KM),
    "max_span_km": (float, None),
    "knn_k": (int, config.KNN_NEIGHBORS),
    "samples": (int, config.POPULATION_SAMPLES),
    "sample_size": (int, config.POPULATION_SAMPLE_SIZE),
    "repeats": (int, config.POPULATION_REPEATS),
}


def _cast(key: str, value: Any) -> Any:
    kind, _ = SETTINGS[key]
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"Setting {key!r} expects {getattr(kind, '__name__', 'a value')}, got {value!r}")


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    if not Path(path).is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    values = dotenv_values(path)
    unknown = sorted(key for key in values if key not in SETTINGS)
    if unknown:
        raise UsageError(f"Unknown configuration key {unknown[0]!r} in {path}")
    return {key: value for key, value in values.items() if value is not None}


def resolve_settings(args, flag_values: Dict[str, Any]) -> Dict[str, Any]:
    """Defaults < --config file < flags (flags left at None do not override)."""
    settings = {key: default for key, (_, default) in SETTINGS.items()}
    if getattr(args, "config", None):
        for key, value in read_config_file(args.config).items():
            settings[key] = _cast(key, value)
    for key, value in flag_values.items():
        if value is not None:
            settings[key] = _cast(key, value)
    return settings


def parse_grid(text: Optional[str]) -> Optional[tuple]:
    if text is None:
        return None
    try:
        rows, cols = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"--grid expects ROWSxCOLS, got {text!r}")
    return rows, cols


def parse_bins(text: str) -> list:
    try:
        return [float(edge) for edge in text.split(",")]
    except ValueError:
        raise UsageError(f"--bins expects comma-separated kilometres, got {text!r}")


class Outputs:
    """Writes files into the output directory and records them in the manifest."""

    def __init__(self, out_dir: Union[str, Path], manifest: RunManifest):
        self.out_dir = Path(out_dir)
        self.manifest = manifest

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_bytes(self, name: str, data: bytes) -> Path:
        path = atomic_write_bytes(self.path(name), data)
        self.manifest.add_output(path)
        return path

    def write_text(self, name: str, text: str) -> Path:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_frame(self, name: str, frame) -> Path:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return self.write_text(name, buffer.getvalue())

    def write_json(self, name: str, payload: Any) -> Path:
        return self.write_text(name, json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")

    def record(self, path: Path) -> Path:
        self.manifest.add_output(path)
        return path

    def finish(self) -> Path:
        return self.manifest.write(self.out_dir)


def read_tracked(path: Union[str, Path], manifest: RunManifest) -> bytes:
    data = read_input(path)
    manifest.add_input(path, data)
    return data


def load_graph(path: Union[str, Path], manifest: RunManifest) -> SocialGraph:
    graph = SocialGraph.load_snapshot(read_tracked(path, manifest))
    logger.info("Loaded snapshot %s: %d users, %d edges, %d checkins",
                path, len(graph.users), graph.edge_count, graph.checkin_count)
    return graph
