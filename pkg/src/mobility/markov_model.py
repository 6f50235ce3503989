# File: src/mobility/markov_model.py

"""
Per-user empirical Markov mobility model.

States are a user's unique checkin locations. Three k x k matrices describe
the user: D (metres between states), A (transition probabilities, built from
consecutive checkins) and T (mean seconds elapsed on observed transitions).
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

import src.config as config
from src.analysis.geo import FieldTransform, GeoPoint, fit_transform, pairwise_haversine_km
from src.fetching.checkin_store import Checkin
from src.utils.errors import ContractViolation, DataError
from src.utils.files import atomic_write_text

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
MODEL_FORMAT_VERSION = 1


@dataclass
class LocationState:
    key: str
    point: GeoPoint
    occurrences: int = 0
    field_x: Optional[float] = None
    field_y: Optional[float] = None

    @property
    def projected(self) -> bool:
        return self.field_x is not None and self.field_y is not None


def _cluster_positions(points: Sequence[GeoPoint], merge_radius_m: float) -> np.ndarray:
    """Single-linkage cluster labels (0-based, arbitrary order) at merge_radius_m."""
    if len(points) == 1:
        return np.zeros(1, dtype=int)
    distances_m = pairwise_haversine_km([p.lat for p in points], [p.lng for p in points]) * 1000.0
    tree = linkage(squareform(distances_m, checks=False), method="single")
    return fcluster(tree, t=merge_radius_m, criterion="distance") - 1


def unique_locations(checkins: Sequence[Checkin],
                     merge_radius_m: float = config.MERGE_RADIUS_M
                     ) -> Tuple[List[LocationState], List[int]]:
    """
    Deduplicate checkins into states. Checkins carrying a location_id are
    grouped by id; the rest are merged by single-linkage clustering.
    States are numbered in order of first appearance.
    """
    if not checkins:
        raise DataError("Cannot build locations from an empty checkin list")

    raw_keys: List[str] = [""] * len(checkins)
    anonymous = [i for i, c in enumerate(checkins) if c.location_id is None]
    for i, checkin in enumerate(checkins):
        if checkin.location_id is not None:
            raw_keys[i] = f"id:{checkin.location_id}"
    if anonymous:
        labels = _cluster_positions([checkins[i].point for i in anonymous], merge_radius_m)
        for i, label in zip(anonymous, labels):
            raw_keys[i] = f"cluster:{label}"

    index_of: Dict[str, int] = {}
    members: List[List[int]] = []
    assignment: List[int] = []
    for i, key in enumerate(raw_keys):
        if key not in index_of:
            index_of[key] = len(members)
            members.append([])
        members[index_of[key]].append(i)
        assignment.append(index_of[key])

    states = []
    for group in members:
        first = checkins[group[0]]
        points = [checkins[i].point for i in group]
        centroid = GeoPoint(float(np.mean([p.lat for p in points])), float(np.mean([p.lng for p in points])))
        key = first.location_id if first.location_id is not None else f"{centroid.lat:.6f},{centroid.lng:.6f}"
        states.append(LocationState(key=str(key), point=centroid, occurrences=len(group)))
    return states, assignment


def build_distance_matrix(states: Sequence[LocationState]) -> np.ndarray:
    """Great-circle distances between state centroids, in metres."""
    if not states:
        raise DataError("Distance matrix needs at least one state")
    return pairwise_haversine_km([s.point.lat for s in states], [s.point.lng for s in states]) * 1000.0


def build_affinity_matrix(sequence: Sequence[int], k: Optional[int] = None) -> np.ndarray:
    """
    f(m, n) = #(m immediately followed by n) / #(occurrences of m).

    The last state of the sequence counts as an occurrence without a
    successor, so its row may sum to less than one.
    """
    if len(sequence) == 0:
        raise DataError("Affinity matrix needs a non-empty state sequence")
    k = k if k is not None else max(sequence) + 1
    counts = np.zeros((k, k))
    for m, n in zip(sequence[:-1], sequence[1:]):
        counts[m, n] += 1
    occurrences = np.bincount(np.asarray(sequence), minlength=k).astype(float)
    affinity = np.zeros((k, k))
    seen = occurrences > 0
    affinity[seen] = counts[seen] / occurrences[seen, None]
    return affinity


def patch_absorbing_states(affinity: np.ndarray) -> np.ndarray:
    """Spread each row's missing mass 1 - s uniformly over all k states."""
    affinity = np.asarray(affinity, dtype=float)
    k = affinity.shape[0]
    if affinity.ndim != 2 or affinity.shape[1] != k or k == 0:
        raise DataError(f"Affinity matrix must be square and non-empty, got shape {affinity.shape}")
    row_sums = affinity.sum(axis=1)
    if np.any(affinity < 0) or np.any(row_sums > 1 + ROW_SUM_TOLERANCE):
        raise DataError("Affinity rows must be non-negative and sum to at most 1")
    deficit = np.clip(1.0 - row_sums, 0.0, None)
    patched = affinity + deficit[:, None] / k
    absorbing = int(np.count_nonzero(row_sums == 0))
    if absorbing:
        logger.debug("Patched %d absorbing state(s)", absorbing)
    return patched


def build_temporal_matrix(sequence: Sequence[int], timestamps: Sequence[float],
                          k: Optional[int] = None) -> np.ndarray:
    """Mean elapsed seconds per observed transition m -> n; NaN when never observed, 0 on the diagonal."""
    if len(sequence) == 0:
        raise DataError("Temporal matrix needs a non-empty state sequence")
    if len(sequence) != len(timestamps):
        raise DataError("State sequence and timestamps differ in length")
    k = k if k is not None else max(sequence) + 1
    totals = np.zeros((k, k))
    counts = np.zeros((k, k))
    for i in range(len(sequence) - 1):
        gap = float(timestamps[i + 1]) - float(timestamps[i])
        if gap < 0:
            raise DataError(f"Checkins out of time order at position {i + 1} (gap {gap} s)")
        totals[sequence[i], sequence[i + 1]] += gap
        counts[sequence[i], sequence[i + 1]] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        temporal = np.where(counts > 0, totals / np.where(counts > 0, counts, 1), np.nan)
    np.fill_diagonal(temporal, 0.0)
    return temporal


@dataclass
class CoverageStats:
    rho: float
    avg_travel: Optional[float]
    max_coverage_area: float


def coverage_stats(distance: np.ndarray) -> CoverageStats:
    """rho = max distance, mean over unordered state pairs, area of the circle of diameter rho."""
    distance = np.asarray(distance, dtype=float)
    k = distance.shape[0]
    if k == 0:
        raise DataError("Coverage needs at least one state")
    rho = float(distance.max())
    avg = None
    if k > 1:
        avg = float(2.0 / (k * (k - 1)) * distance[np.triu_indices(k, 1)].sum())
    return CoverageStats(rho=rho, avg_travel=avg, max_coverage_area=math.pi * (rho / 2) ** 2)


@dataclass
class MobilityModel:
    user_id: str
    states: List[LocationState]
    D: np.ndarray
    A_raw: np.ndarray
    A: np.ndarray
    T: np.ndarray
    transform: Optional[FieldTransform] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.states)

    @property
    def projected(self) -> bool:
        return all(s.projected for s in self.states)

    @property
    def field_positions(self) -> np.ndarray:
        if not self.projected:
            raise ContractViolation(f"Model of user {self.user_id!r} has not been projected to the field")
        return np.array([[s.field_x, s.field_y] for s in self.states], dtype=float)

    @property
    def occurrences(self) -> np.ndarray:
        return np.array([s.occurrences for s in self.states], dtype=float)

    def coverage(self) -> CoverageStats:
        return coverage_stats(self.D)

    def check_stochastic(self) -> None:
        row_sums = self.A.sum(axis=1)
        bad = np.flatnonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE)
        if bad.size or np.any(self.A < 0):
            raise ContractViolation(
                f"Affinity matrix of user {self.user_id!r} is not row-stochastic (rows {bad.tolist()})"
            )

    def to_dict(self) -> dict:
        def matrix(values):
            return [[None if math.isnan(v) else float(v) for v in row] for row in values]

        return {
            "user_id": self.user_id,
            "states": [
                {"key": s.key, "lat": s.point.lat, "lng": s.point.lng, "occurrences": s.occurrences,
                 "x": s.field_x, "y": s.field_y}
                for s in self.states
            ],
            "D": matrix(self.D),
            "A_raw": matrix(self.A_raw),
            "A": matrix(self.A),
            "T": matrix(self.T),
            "coverage": vars(self.coverage()),
        }

    @classmethod
    def from_dict(cls, data: dict, transform: Optional[FieldTransform] = None) -> "MobilityModel":
        def matrix(values):
            return np.array([[np.nan if v is None else v for v in row] for row in values], dtype=float)

        states = [
            LocationState(key=s["key"], point=GeoPoint(s["lat"], s["lng"]), occurrences=int(s["occurrences"]),
                          field_x=s.get("x"), field_y=s.get("y"))
            for s in data["states"]
        ]
        return cls(
            user_id=str(data["user_id"]),
            states=states,
            D=matrix(data["D"]),
            A_raw=matrix(data["A_raw"]),
            A=matrix(data["A"]),
            T=matrix(data["T"]),
            transform=transform,
        )


def build_mobility_model(user_id: str, checkins: Sequence[Checkin],
                         merge_radius_m: float = config.MERGE_RADIUS_M) -> MobilityModel:
    """Unprojected model from one user's time-ordered checkins."""
    if not checkins:
        raise DataError(f"User {user_id!r} has no checkins to build a model from")
    states, sequence = unique_locations(checkins, merge_radius_m)
    k = len(states)
    affinity_raw = build_affinity_matrix(sequence, k)
    model = MobilityModel(
        user_id=user_id,
        states=states,
        D=build_distance_matrix(states),
        A_raw=affinity_raw,
        A=patch_absorbing_states(affinity_raw),
        T=build_temporal_matrix(sequence, [c.timestamp for c in checkins], k),
    )
    logger.debug("Model for %s: %d checkins, %d states", user_id, len(checkins), k)
    return model


def project_models(models: Sequence[MobilityModel], width: float = config.SIM_WIDTH,
                   height: float = config.SIM_HEIGHT,
                   preserve_scale: bool = False) -> Tuple[List[MobilityModel], FieldTransform]:
    """Place every state of every model with one shared transform."""
    if not models:
        raise DataError("No models to project")
    lats = [s.point.lat for m in models for s in m.states]
    lngs = [s.point.lng for m in models for s in m.states]
    transform = fit_transform(lats, lngs, width, height, preserve_scale)
    coords = transform.apply_arrays(lats, lngs)
    projected, offset = [], 0
    for model in models:
        states = []
        for state in model.states:
            x, y = coords[offset]
            offset += 1
            states.append(LocationState(state.key, state.point, state.occurrences, float(x), float(y)))
        projected.append(MobilityModel(model.user_id, states, model.D, model.A_raw, model.A, model.T, transform))
    return projected, transform


def dump_models(models: Sequence[MobilityModel], path: Union[str, Path]) -> Path:
    transforms = {id(m.transform): m.transform for m in models if m.transform is not None}
    if len(transforms) > 1:
        raise ContractViolation("Models in one dump must share a single field transform")
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "transform": next(iter(transforms.values())).to_dict() if transforms else None,
        "models": [m.to_dict() for m in models],
    }
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_models(path: Union[str, Path]) -> List[MobilityModel]:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataError(f"Unsupported model file version {payload.get('format_version')!r} in {path}")
    transform = FieldTransform.from_dict(payload["transform"]) if payload.get("transform") else None
    return [MobilityModel.from_dict(item, transform) for item in payload["models"]]
