# File: src/simulation/contention.py

"""
Time-stepped wireless contention over mobility traces.

Every tick each node wants to transmit. Nodes within radio range of each
other contend; per contention set one node wins and every other member
backs off, pausing for the tick in the grid cell it currently occupies.
"""

import io
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

import src.config as config
from src.mobility.traces import Trace, positions_at, trace_end
from src.utils.errors import ContractViolation, DataError, UsageError

logger = logging.getLogger(__name__)

CONTENTION_COMPONENTS = "components"
CONTENTION_PAIRWISE = "pairwise"

# config-file key -> (SimConfig field, type)
SIM_KEYS = {
    "simulation_time": ("duration", float),
    "width": ("width", float),
    "length": ("height", float),
    "nodes": ("node_count", int),
    "radio_range": ("radio_range", float),
    "tick": ("tick", float),
    "grid_rows": ("grid_rows", int),
    "grid_cols": ("grid_cols", int),
    "seed": ("rng_seed", int),
    "contention": ("contention", str),
}
# consumed by the RWP generator, accepted in the same file
RWP_KEYS = {"min_speed": float, "max_speed": float, "pause_time": float}


@dataclass(frozen=True)
class SimConfig:
    duration: float = config.SIM_DURATION
    width: float = config.SIM_WIDTH
    height: float = config.SIM_HEIGHT
    node_count: int = config.SIM_NODES
    radio_range: float = config.SIM_RADIO_RANGE
    tick: float = config.SIM_TICK
    grid_rows: int = config.SIM_GRID_ROWS
    grid_cols: int = config.SIM_GRID_COLS
    rng_seed: int = config.DEFAULT_SEED
    contention: str = CONTENTION_COMPONENTS

    def __post_init__(self):
        if self.duration <= 0 or self.tick <= 0 or self.tick > self.duration:
            raise DataError(f"Need 0 < tick <= duration, got tick={self.tick}, duration={self.duration}")
        if self.radio_range <= 0:
            raise DataError(f"radio_range must be positive, got {self.radio_range}")
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"Field must have positive size, got {self.width} x {self.height}")
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise DataError(f"Grid needs at least one row and column, got {self.grid_rows}x{self.grid_cols}")
        if self.node_count < 1:
            raise DataError(f"node_count must be >= 1, got {self.node_count}")
        if self.contention not in (CONTENTION_COMPONENTS, CONTENTION_PAIRWISE):
            raise DataError(f"Unknown contention rule {self.contention!r}")

    @property
    def tick_count(self) -> int:
        return int(math.ceil(self.duration / self.tick - 1e-9))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any], base: Optional["SimConfig"] = None) -> "SimConfig":
        """Apply key = value settings on top of base (defaults when None)."""
        values = asdict(base or cls())
        for key, raw in mapping.items():
            if key in RWP_KEYS:
                continue
            if key not in SIM_KEYS:
                raise UsageError(f"Unknown configuration key {key!r}")
            name, kind = SIM_KEYS[key]
            try:
                values[name] = kind(raw)
            except (TypeError, ValueError):
                raise UsageError(f"Configuration key {key!r} expects {kind.__name__}, got {raw!r}")
        return cls(**values)

    def to_mapping(self) -> Dict[str, Any]:
        by_field = {name: key for key, (name, _) in SIM_KEYS.items()}
        return {by_field[name]: value for name, value in asdict(self).items()}


@dataclass
class CongestionGrid:
    rows: int
    cols: int
    width: float
    height: float
    backoffs: np.ndarray = None
    pause_seconds: np.ndarray = None

    def __post_init__(self):
        if self.backoffs is None:
            self.backoffs = np.zeros((self.rows, self.cols), dtype=np.int64)
        if self.pause_seconds is None:
            self.pause_seconds = np.zeros((self.rows, self.cols), dtype=float)

    def cell_of(self, x: float, y: float) -> Tuple[int, int]:
        col = min(int(x / (self.width / self.cols)), self.cols - 1)
        row = min(int(y / (self.height / self.rows)), self.rows - 1)
        return row, col

    def record(self, x: float, y: float, seconds: float) -> None:
        row, col = self.cell_of(x, y)
        self.backoffs[row, col] += 1
        self.pause_seconds[row, col] += seconds

    @property
    def total_backoffs(self) -> int:
        return int(self.backoffs.sum())

    @property
    def total_pause_seconds(self) -> float:
        return float(self.pause_seconds.sum())

    def cell_center(self, row: int, col: int) -> Tuple[float, float]:
        return ((col + 0.5) * self.width / self.cols, (row + 0.5) * self.height / self.rows)

    def to_frame(self) -> pd.DataFrame:
        """Row-major, one line per cell."""
        rows, cols = np.indices((self.rows, self.cols))
        return pd.DataFrame({
            "row": rows.ravel(),
            "col": cols.ravel(),
            "backoffs": self.backoffs.ravel(),
            "pause_seconds": self.pause_seconds.ravel(),
        })

    def center_vs_border(self) -> Tuple[float, float]:
        """Mean backoffs of the central 2x2 block and of the outer ring of cells."""
        if self.rows < 4 or self.cols < 4:
            raise DataError("Center/border comparison needs at least a 4x4 grid")
        r0, c0 = self.rows // 2 - 1, self.cols // 2 - 1
        center = self.backoffs[r0:r0 + 2, c0:c0 + 2].mean()
        ring = np.ones((self.rows, self.cols), dtype=bool)
        ring[1:-1, 1:-1] = False
        return float(center), float(self.backoffs[ring].mean())


@dataclass
class SimReport:
    config: SimConfig
    total_backoffs: int
    per_node_backoffs: np.ndarray
    grid: CongestionGrid
    ticks: int
    label: str = ""

    def __post_init__(self):
        if self.total_backoffs != int(self.per_node_backoffs.sum()) or \
                self.total_backoffs != self.grid.total_backoffs:
            raise ContractViolation("Backoff totals disagree between nodes, grid and report")


def _validate_traces(traces: Sequence[Trace], cfg: SimConfig) -> None:
    if len(traces) != cfg.node_count:
        raise ContractViolation(f"Config expects {cfg.node_count} nodes, got {len(traces)} traces")
    for node, trace in enumerate(traces):
        if not trace:
            raise ContractViolation(f"Node {node} has an empty trace")
        if trace_end(trace) < cfg.duration:
            raise ContractViolation(
                f"Trace of node {node} ends at {trace_end(trace)} s, before the run ends at {cfg.duration} s"
            )


def _pairwise_losers(positions: np.ndarray, radio_range: float, rng: np.random.Generator) -> List[int]:
    """Every in-range pair contends on its own; one of the two backs off."""
    distances = squareform(pdist(positions))
    first, second = np.nonzero(np.triu(distances <= radio_range, k=1))
    losers = []
    for a, b in zip(first, second):
        losers.append(int(b) if rng.integers(2) == 0 else int(a))
    assert len(losers) == len(first)
    return losers


def _component_losers(positions: np.ndarray, radio_range: float, rng: np.random.Generator) -> List[int]:
    """One winner per connected set of in-range nodes; the other members lose."""
    in_range = squareform(pdist(positions)) <= radio_range
    np.fill_diagonal(in_range, False)
    if not in_range.any():
        return []
    count, labels = connected_components(csr_matrix(in_range), directed=False)
    losers, expected = [], 0
    for component in range(count):
        members = np.flatnonzero(labels == component)
        if members.size < 2:
            continue
        winner = members[rng.integers(members.size)]
        losers.extend(int(m) for m in members if m != winner)
        expected += members.size - 1
    assert len(losers) == expected
    return losers


def run_simulation(traces: Sequence[Trace], cfg: SimConfig, label: str = "") -> SimReport:
    _validate_traces(traces, cfg)
    times = np.arange(cfg.tick_count) * cfg.tick
    # (nodes, ticks, 2)
    positions = np.stack([positions_at(trace, times) for trace in traces])
    outside = ((positions[..., 0] < 0) | (positions[..., 0] > cfg.width)
               | (positions[..., 1] < 0) | (positions[..., 1] > cfg.height))
    if outside.any():
        node, tick = map(int, np.argwhere(outside)[0])
        raise ContractViolation(f"Node {node} is outside the field at t={times[tick]} s")

    rng = np.random.default_rng(cfg.rng_seed)
    grid = CongestionGrid(cfg.grid_rows, cfg.grid_cols, cfg.width, cfg.height)
    per_node = np.zeros(len(traces), dtype=np.int64)
    contend = _component_losers if cfg.contention == CONTENTION_COMPONENTS else _pairwise_losers

    if len(traces) > 1:
        for tick in range(cfg.tick_count):
            snapshot = positions[:, tick, :]
            for loser in contend(snapshot, cfg.radio_range, rng):
                per_node[loser] += 1
                grid.record(snapshot[loser, 0], snapshot[loser, 1], cfg.tick)

    report = SimReport(cfg, int(per_node.sum()), per_node, grid, cfg.tick_count, label)
    logger.info("Simulation %s: %d nodes, %d ticks, %d backoffs",
                label or "run", len(traces), cfg.tick_count, report.total_backoffs)
    return report


@dataclass
class ModelComparison:
    fmm: SimReport
    rwp: SimReport

    @property
    def ratio(self) -> float:
        """FMM backoffs over RWP backoffs."""
        if self.rwp.total_backoffs == 0:
            return 1.0 if self.fmm.total_backoffs == 0 else float("inf")
        return self.fmm.total_backoffs / self.rwp.total_backoffs

    @property
    def cell_difference(self) -> np.ndarray:
        return self.fmm.grid.backoffs - self.rwp.grid.backoffs


def compare_models(fmm_traces: Sequence[Trace], rwp_traces: Sequence[Trace], cfg: SimConfig) -> ModelComparison:
    """Both runs use the same config and seed."""
    comparison = ModelComparison(
        fmm=run_simulation(fmm_traces, cfg, label="fmm"),
        rwp=run_simulation(rwp_traces, cfg, label="rwp"),
    )
    logger.info("FMM/RWP backoff ratio %.3f", comparison.ratio)
    return comparison


def grid_heatmap_export(grid: CongestionGrid) -> str:
    buffer = io.StringIO()
    grid.to_frame().to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def report_frame(report: SimReport) -> pd.DataFrame:
    return pd.DataFrame({
        "node": np.arange(len(report.per_node_backoffs)),
        "backoffs": report.per_node_backoffs,
        "pause_seconds": report.per_node_backoffs * report.config.tick,
    })


def comparison_frame(comparison: ModelComparison) -> pd.DataFrame:
    frame = comparison.fmm.grid.to_frame().rename(
        columns={"backoffs": "fmm_backoffs", "pause_seconds": "fmm_pause_seconds"})
    rwp = comparison.rwp.grid.to_frame()
    frame["rwp_backoffs"] = rwp["backoffs"]
    frame["rwp_pause_seconds"] = rwp["pause_seconds"]
    frame["backoff_difference"] = frame["fmm_backoffs"] - frame["rwp_backoffs"]
    return frame


def congestion_points(grid: CongestionGrid) -> pd.DataFrame:
    """Cells with at least one backoff, located by their centre."""
    frame = grid.to_frame()
    frame = frame[frame["backoffs"] > 0].reset_index(drop=True)
    centers = [grid.cell_center(r, c) for r, c in zip(frame["row"], frame["col"])]
    frame["x"] = [c[0] for c in centers]
    frame["y"] = [c[1] for c in centers]
    return frame


def format_summary(report: SimReport) -> str:
    cfg = report.config
    busiest = np.unravel_index(int(np.argmax(report.grid.backoffs)), report.grid.backoffs.shape)
    lines = [
        f"model: {report.label or 'n/a'}",
        f"nodes: {cfg.node_count}",
        f"field: {cfg.width:g} x {cfg.height:g} m",
        f"duration: {cfg.duration:g} s in {report.ticks} ticks of {cfg.tick:g} s",
        f"radio range: {cfg.radio_range:g} m ({cfg.contention})",
        f"total backoffs: {report.total_backoffs}",
        f"total pause: {report.grid.total_pause_seconds:g} s",
        f"busiest cell: row {busiest[0]}, col {busiest[1]} "
        f"({int(report.grid.backoffs[busiest])} backoffs)",
    ]
    return "\n".join(lines) + "\n"
