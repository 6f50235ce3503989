# File: src/mobility/traces.py

"""
Trace generation for the friendship mobility model (FMM) and the random
waypoint baseline (RWP).

A trace is a list of Waypoints. At time t the node is at pos and leaves it
towards the next waypoint at speed_to_next; a speed of 0 means it waits
there until the next waypoint's time. The last waypoint always has speed 0
and a time at or past the requested duration.
"""

import bisect
import logging
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

import src.config as config
from src.analysis.geo import FieldPoint
from src.mobility.markov_model import ROW_SUM_TOLERANCE, MobilityModel
from src.utils.errors import ContractViolation, DataError
from src.utils.rng import stream

logger = logging.getLogger(__name__)

START_UNIFORM = "uniform"
START_WEIGHTED = "weighted"


@dataclass(frozen=True)
class Waypoint:
    t: float
    pos: FieldPoint
    speed_to_next: float

    @property
    def x(self) -> float:
        return self.pos.x

    @property
    def y(self) -> float:
        return self.pos.y


Trace = List[Waypoint]


def leg_duration(a: FieldPoint, b: FieldPoint, speed: float) -> float:
    return math.hypot(b.x - a.x, b.y - a.y) / speed


@dataclass(frozen=True)
class RwpConfig:
    width: float = config.SIM_WIDTH
    height: float = config.SIM_HEIGHT
    min_speed: float = config.RWP_MIN_SPEED
    max_speed: float = config.RWP_MAX_SPEED
    pause_time: float = config.RWP_PAUSE_TIME
    duration: float = config.SIM_DURATION

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"Field must have positive size, got {self.width} x {self.height}")
        if not 0 <= self.min_speed <= self.max_speed or self.max_speed <= 0:
            raise DataError(f"Need 0 <= min_speed <= max_speed and max_speed > 0, "
                            f"got [{self.min_speed}, {self.max_speed}]")
        if self.pause_time < 0 or self.duration <= 0:
            raise DataError("pause_time must be >= 0 and duration > 0")


@dataclass(frozen=True)
class SpeedPolicy:
    """
    mode "fixed": every leg at `speed`.
    mode "temporal": field distance / min(T[m][n], max_gap_s), clamped to
    [min_speed, max_speed]; unobserved transitions fall back to `speed`.
    """
    mode: str = "fixed"
    speed: float = config.FMM_SPEED
    min_speed: float = config.FMM_MIN_SPEED
    max_speed: float = config.FMM_MAX_SPEED
    max_gap_s: float = config.FMM_MAX_GAP_S
    dwell_s: float = config.FMM_DWELL_S

    def __post_init__(self):
        if self.mode not in ("fixed", "temporal"):
            raise DataError(f"Unknown speed policy {self.mode!r}")
        if self.speed <= 0 or self.min_speed <= 0 or self.min_speed > self.max_speed:
            raise DataError("Speeds must be positive with min_speed <= max_speed")
        if self.dwell_s <= 0:
            raise DataError("Dwell time must be positive")
        if self.max_gap_s <= 0:
            raise DataError("max_gap_s must be positive")

    def leg_speed(self, distance_m: float, elapsed_s: float) -> float:
        if self.mode == "fixed" or not math.isfinite(elapsed_s) or elapsed_s <= 0:
            return self.speed
        derived = distance_m / min(elapsed_s, self.max_gap_s)
        return min(self.max_speed, max(self.min_speed, derived))


class ChainSampler:
    """Inverse-CDF sampling of next states from a row-stochastic matrix."""

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise ContractViolation(f"Transition matrix must be square and non-empty, got {A.shape}")
        row_sums = A.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE) or np.any(A < 0):
            raise ContractViolation("Transition matrix is not row-stochastic; patch absorbing states first")
        self.k = A.shape[0]
        self.cumulative = [list(np.cumsum(row)) for row in A]
        # rounding can leave the cumulative sum a hair under 1
        self.last_index = [int(np.flatnonzero(row > 0)[-1]) for row in A]

    def next_state(self, current: int, u: float) -> int:
        index = bisect.bisect_right(self.cumulative[current], u)
        return min(index, self.last_index[current])


def walk_states(A: np.ndarray, steps: int, rng_seed: int, start: Optional[int] = None) -> np.ndarray:
    """Visited state indices of a steps-transition walk (steps + 1 entries, start included)."""
    sampler = ChainSampler(A)
    rng = np.random.default_rng(rng_seed)
    current = int(rng.integers(sampler.k)) if start is None else int(start)
    if not 0 <= current < sampler.k:
        raise DataError(f"Start state {current} outside [0, {sampler.k})")
    visited = np.empty(steps + 1, dtype=np.int64)
    visited[0] = current
    for i, u in enumerate(rng.random(steps), start=1):
        current = sampler.next_state(current, u)
        visited[i] = current
    return visited


def _start_state(model: MobilityModel, start: str, rng: np.random.Generator) -> int:
    if start == START_UNIFORM:
        return int(rng.integers(model.k))
    if start == START_WEIGHTED:
        weights = model.occurrences
        return int(rng.choice(model.k, p=weights / weights.sum()))
    raise DataError(f"Unknown start mode {start!r}")


def generate_fmm_trace(model: MobilityModel, duration: float = config.SIM_DURATION,
                       policy: Optional[SpeedPolicy] = None, rng_seed: int = config.DEFAULT_SEED,
                       start: str = START_UNIFORM) -> Trace:
    """
    Walk the model's chain from a random start state. Moves are straight
    lines between state positions; self-transitions (and moves between
    states projected onto the same point) wait dwell_s seconds.
    """
    if duration <= 0:
        raise DataError(f"Duration must be positive, got {duration}")
    policy = policy or SpeedPolicy()
    model.check_stochastic()
    sampler = ChainSampler(model.A)
    positions = [FieldPoint(float(x), float(y)) for x, y in model.field_positions]
    rng = np.random.default_rng(rng_seed)

    current = _start_state(model, start, rng)
    t = 0.0
    trace: Trace = []
    while t < duration:
        following = sampler.next_state(current, rng.random())
        here, there = positions[current], positions[following]
        distance = math.hypot(there.x - here.x, there.y - here.y)
        if following == current or distance == 0.0:
            trace.append(Waypoint(t, here, 0.0))
            t += policy.dwell_s
        else:
            speed = policy.leg_speed(distance, float(model.T[current, following]))
            trace.append(Waypoint(t, here, speed))
            t += leg_duration(here, there, speed)
        current = following
    trace.append(Waypoint(t, positions[current], 0.0))
    return trace


def generate_rwp_trace(cfg: RwpConfig, rng_seed: int = config.DEFAULT_SEED) -> Trace:
    """Uniform start, uniform destinations, per-leg speed uniform in [min, max], pause at each arrival."""
    if cfg.min_speed == 0:
        warnings.warn(
            "RWP with min_speed 0: the average speed decays over time and the run never becomes stationary",
            RuntimeWarning,
        )
    rng = np.random.default_rng(rng_seed)
    here = FieldPoint(float(rng.uniform(0, cfg.width)), float(rng.uniform(0, cfg.height)))
    t = 0.0
    trace: Trace = []
    while t < cfg.duration:
        there = FieldPoint(float(rng.uniform(0, cfg.width)), float(rng.uniform(0, cfg.height)))
        speed = float(rng.uniform(cfg.min_speed, cfg.max_speed))
        while speed <= 0.0:
            speed = float(rng.uniform(cfg.min_speed, cfg.max_speed))
        trace.append(Waypoint(t, here, speed))
        t += leg_duration(here, there, speed)
        here = there
        if cfg.pause_time > 0 and t < cfg.duration:
            trace.append(Waypoint(t, here, 0.0))
            t += cfg.pause_time
    trace.append(Waypoint(t, here, 0.0))
    return trace


def generate_fmm_traces(models: Sequence[MobilityModel], duration: float, policy: Optional[SpeedPolicy],
                        rng_seed: int, start: str = START_UNIFORM) -> List[Trace]:
    """One trace per model; node i draws from the stream derived from (rng_seed, i)."""
    return [
        generate_fmm_trace(model, duration, policy, int(stream(rng_seed, i).integers(2**31)), start)
        for i, model in enumerate(models)
    ]


def generate_rwp_traces(cfg: RwpConfig, node_count: int, rng_seed: int) -> List[Trace]:
    return [generate_rwp_trace(cfg, int(stream(rng_seed, i).integers(2**31))) for i in range(node_count)]


def positions_at(trace: Trace, times) -> np.ndarray:
    """(n, 2) positions at the given times; before 0 or after the end the node sits at the endpoint."""
    if not trace:
        raise DataError("Empty trace")
    times = np.asarray(times, dtype=float)
    ts = np.array([w.t for w in trace])
    xs = np.array([w.x for w in trace])
    ys = np.array([w.y for w in trace])
    moving = np.array([w.speed_to_next > 0 for w in trace])

    index = np.clip(np.searchsorted(ts, times, side="right") - 1, 0, len(trace) - 1)
    following = np.minimum(index + 1, len(trace) - 1)
    span = ts[following] - ts[index]
    with np.errstate(invalid="ignore", divide="ignore"):
        fraction = np.where(moving[index] & (span > 0), (times - ts[index]) / span, 0.0)
    fraction = np.clip(fraction, 0.0, 1.0)
    x = xs[index] + fraction * (xs[following] - xs[index])
    y = ys[index] + fraction * (ys[following] - ys[index])
    return np.column_stack([x, y])


def trace_end(trace: Trace) -> float:
    return trace[-1].t if trace else 0.0
