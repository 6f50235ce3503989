# File: src/analysis/social.py

"""
Pairwise social/mobility metrics: checkin similarity, average pair distance,
the friendship-vs-distance curve and a kNN friend classifier over
(average distance, checkin similarity).
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from sklearn.model_selection import train_test_split
from sklearn.neighbors import NearestNeighbors
from sklearn.preprocessing import StandardScaler

import src.config as config
from src.analysis.geo import GeoPoint, haversine_distance, haversine_km
from src.fetching.checkin_store import SocialGraph
from src.utils.errors import DataError, InsufficientPairsError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchWindow:
    time_epsilon: float = config.MATCH_TIME_EPSILON_S
    space_epsilon: float = config.MATCH_SPACE_EPSILON_KM

    def __post_init__(self):
        if not (self.time_epsilon > 0 and self.space_epsilon > 0):
            raise DataError(
                f"Match window must be strictly positive, got {self.time_epsilon} s / {self.space_epsilon} km"
            )


@dataclass
class PairFeatures:
    user_a: str
    user_b: str
    checkin_similarity: float
    avg_distance_km: float
    is_friend: bool

    def __post_init__(self):
        if self.user_a == self.user_b:
            raise DataError(f"Pair features need two distinct users, got {self.user_a!r} twice")


# ----------------------------------------------------------------------
# Per-pair metrics
# ----------------------------------------------------------------------

def _match_mask(graph: SocialGraph, a: str, b: str, window: MatchWindow) -> np.ndarray:
    ca = graph.user_checkins(a)
    cb = graph.user_checkins(b)
    ta = np.array([c.timestamp for c in ca], dtype=float)
    tb = np.array([c.timestamp for c in cb], dtype=float)
    close_in_time = np.abs(ta[:, None] - tb[None, :]) <= window.time_epsilon
    distance = haversine_km(
        np.array([c.point.lat for c in ca])[:, None], np.array([c.point.lng for c in ca])[:, None],
        np.array([c.point.lat for c in cb])[None, :], np.array([c.point.lng for c in cb])[None, :],
    )
    return close_in_time & (distance <= window.space_epsilon)


def matched_checkin_count(graph: SocialGraph, a: str, b: str, window: MatchWindow) -> int:
    """Size of a maximum one-to-one matching of a's checkins to b's under the window."""
    if not graph.user_checkins(a) or not graph.user_checkins(b):
        return 0
    mask = _match_mask(graph, a, b, window)
    if not mask.any():
        return 0
    matching = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return int(np.count_nonzero(matching >= 0))


def checkin_similarity(graph: SocialGraph, a: str, b: str,
                       window: Optional[MatchWindow] = None) -> Optional[float]:
    """
    |C_a ∩ C_b| / |C_a ∪ C_b|. Returns None when neither user has a checkin,
    since the ratio is undefined there.
    """
    window = window or MatchWindow()
    size_a = len(graph.user_checkins(a))
    size_b = len(graph.user_checkins(b))
    if size_a == 0 and size_b == 0:
        return None
    shared = matched_checkin_count(graph, a, b, window)
    return shared / (size_a + size_b - shared)


def average_position(graph: SocialGraph, user_id: str) -> GeoPoint:
    """Plain mean of latitudes and longitudes (no antimeridian correction)."""
    checkins = graph.user_checkins(user_id)
    if not checkins:
        raise DataError(f"User {user_id!r} has no checkins")
    return GeoPoint(
        float(np.mean([c.point.lat for c in checkins])),
        float(np.mean([c.point.lng for c in checkins])),
    )


def average_pair_distance(graph: SocialGraph, a: str, b: str) -> float:
    return haversine_distance(average_position(graph, a), average_position(graph, b))


def checkin_span_km(graph: SocialGraph, user_id: str) -> float:
    """Largest distance of a user's checkins from their average position."""
    center = average_position(graph, user_id)
    checkins = graph.user_checkins(user_id)
    distances = haversine_km(center.lat, center.lng,
                             [c.point.lat for c in checkins], [c.point.lng for c in checkins])
    return float(np.max(distances))


def eligible_users(graph: SocialGraph, max_span_km: Optional[float] = None) -> List[str]:
    """Users with at least one checkin, optionally without long-range travellers."""
    users = [u for u in graph.sorted_users() if graph.checkins[u]]
    if max_span_km is None:
        return users
    kept = [u for u in users if checkin_span_km(graph, u) <= max_span_km]
    if len(kept) < len(users):
        logger.info("Span filter (%.1f km) excluded %d users", max_span_km, len(users) - len(kept))
    return kept


def pair_features(graph: SocialGraph, pairs: Iterable[Tuple[str, str]],
                  window: Optional[MatchWindow] = None) -> List[PairFeatures]:
    window = window or MatchWindow()
    features = []
    for a, b in pairs:
        features.append(PairFeatures(
            user_a=a,
            user_b=b,
            checkin_similarity=checkin_similarity(graph, a, b, window),
            avg_distance_km=average_pair_distance(graph, a, b),
            is_friend=graph.are_friends(a, b),
        ))
    return features


# ----------------------------------------------------------------------
# Pair sampling
# ----------------------------------------------------------------------

def _sample_friend_pairs(graph: SocialGraph, users: Sequence[str], count: int,
                         rng: np.random.Generator) -> List[Tuple[str, str]]:
    allowed = set(users)
    candidates = [(a, b) for a, b in graph.sorted_edges() if a in allowed and b in allowed]
    if len(candidates) < count:
        raise InsufficientPairsError("friend", len(candidates), count)
    picks = rng.choice(len(candidates), size=count, replace=False)
    return [candidates[i] for i in sorted(picks)]


def _sample_nonfriend_pairs(graph: SocialGraph, users: Sequence[str], count: int,
                            rng: np.random.Generator) -> List[Tuple[str, str]]:
    """Uniform over unordered user pairs, rejecting friendships and repeats."""
    allowed = set(users)
    friend_pairs = sum(1 for a, b in graph.friendships.edges if a in allowed and b in allowed)
    available = len(users) * (len(users) - 1) // 2 - friend_pairs
    if available < count:
        raise InsufficientPairsError("non-friend", available, count)
    chosen = set()
    while len(chosen) < count:
        i, j = rng.choice(len(users), size=2, replace=False)
        a, b = sorted((users[i], users[j]))
        if (a, b) in chosen or graph.are_friends(a, b):
            continue
        chosen.add((a, b))
    return sorted(chosen)


def sample_labelled_pairs(graph: SocialGraph, pair_count: int, rng_seed: int,
                          max_span_km: Optional[float] = None
                          ) -> Tuple[List[Tuple[str, str]], List[Tuple[str, str]]]:
    users = eligible_users(graph, max_span_km)
    rng = np.random.default_rng(rng_seed)
    friends = _sample_friend_pairs(graph, users, pair_count, rng)
    strangers = _sample_nonfriend_pairs(graph, users, pair_count, rng)
    return friends, strangers


# ----------------------------------------------------------------------
# Friendship vs distance
# ----------------------------------------------------------------------

@dataclass
class DistanceCurve:
    bin_edges: List[float]
    friend_counts: np.ndarray
    nonfriend_counts: np.ndarray
    friend_fraction: np.ndarray
    nonfriend_fraction: np.ndarray
    pair_count: int

    @property
    def bin_centers(self) -> np.ndarray:
        edges = np.asarray(self.bin_edges, dtype=float)
        return (edges[:-1] + edges[1:]) / 2

    def to_frame(self) -> pd.DataFrame:
        edges = np.asarray(self.bin_edges, dtype=float)
        return pd.DataFrame({
            "bin_start_km": edges[:-1],
            "bin_end_km": edges[1:],
            "friend_count": self.friend_counts,
            "friend_fraction": self.friend_fraction,
            "nonfriend_count": self.nonfriend_counts,
            "nonfriend_fraction": self.nonfriend_fraction,
        })


def _normalised(counts: np.ndarray, label: str) -> np.ndarray:
    total = counts.sum()
    if total == 0:
        warnings.warn(f"No {label} pairs fall inside the curve bins", RuntimeWarning)
        return np.zeros(len(counts))
    return counts / total


def friendship_distance_curve(graph: SocialGraph, pair_count: int = config.CURVE_PAIR_COUNT,
                              bin_edges: Sequence[float] = tuple(config.CURVE_BIN_EDGES),
                              rng_seed: int = config.DEFAULT_SEED,
                              max_span_km: Optional[float] = None) -> DistanceCurve:
    """
    Histogram average pair distances of pair_count random friend pairs and
    pair_count random non-friend pairs. Fractions are normalised within
    each class over the pairs that fall inside the bins.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DataError("Curve bin edges must be strictly increasing with at least two edges")
    if pair_count < 1:
        raise DataError(f"pair_count must be >= 1, got {pair_count}")

    friends, strangers = sample_labelled_pairs(graph, pair_count, rng_seed, max_span_km)
    positions = {u: average_position(graph, u) for pair in friends + strangers for u in pair}

    def distances(pairs):
        a = [positions[x] for x, _ in pairs]
        b = [positions[y] for _, y in pairs]
        return haversine_km([p.lat for p in a], [p.lng for p in a], [p.lat for p in b], [p.lng for p in b])

    friend_counts, _ = np.histogram(distances(friends), bins=edges)
    nonfriend_counts, _ = np.histogram(distances(strangers), bins=edges)
    return DistanceCurve(
        bin_edges=[float(e) for e in edges],
        friend_counts=friend_counts,
        nonfriend_counts=nonfriend_counts,
        friend_fraction=_normalised(friend_counts, "friend"),
        nonfriend_fraction=_normalised(nonfriend_counts, "non-friend"),
        pair_count=pair_count,
    )


@dataclass
class DecayFit:
    slope_per_km: float
    intercept: float
    bins_used: int

    @property
    def decay_length_km(self) -> float:
        return -1.0 / self.slope_per_km if self.slope_per_km < 0 else float("inf")


def friendship_decay_rate(curve: DistanceCurve, min_count: int = 5) -> DecayFit:
    """Weighted log-linear fit of friend fraction against bin centre; weights are bin counts."""
    keep = curve.friend_counts >= max(min_count, 1)
    if keep.sum() < 2:
        raise DataError("Need at least two populated bins to fit a decay rate")
    x = curve.bin_centers[keep]
    y = np.log(curve.friend_fraction[keep])
    model = sm.WLS(y, sm.add_constant(x), weights=curve.friend_counts[keep].astype(float))
    intercept, slope = model.fit().params
    return DecayFit(slope_per_km=float(slope), intercept=float(intercept), bins_used=int(keep.sum()))


# ----------------------------------------------------------------------
# kNN classification
# ----------------------------------------------------------------------

def _feature_matrix(features: Sequence[PairFeatures]) -> np.ndarray:
    return np.array([[f.avg_distance_km, f.checkin_similarity] for f in features], dtype=float)


@dataclass
class KnnFriendClassifier:
    """
    Majority vote among the k nearest training pairs in z-scored
    (distance, similarity) space. A tied vote predicts non-friend.
    """
    k: int = config.KNN_NEIGHBORS
    scaler: StandardScaler = field(default=None, init=False, repr=False)
    index: NearestNeighbors = field(default=None, init=False, repr=False)
    labels: np.ndarray = field(default=None, init=False, repr=False)
    constant_columns: np.ndarray = field(default=None, init=False, repr=False)

    def fit(self, training: Sequence[PairFeatures]) -> "KnnFriendClassifier":
        if not training:
            raise DataError("kNN training set is empty")
        if not 1 <= self.k <= len(training):
            raise DataError(f"k must be within [1, {len(training)}], got {self.k}")
        matrix = _feature_matrix(training)
        self.scaler = StandardScaler().fit(matrix)
        self.constant_columns = self.scaler.var_ == 0
        if self.constant_columns.any():
            names = [n for n, c in zip(("avg_distance_km", "checkin_similarity"), self.constant_columns) if c]
            warnings.warn(f"Zero-variance kNN feature(s) {names}; their z-scores are set to 0",
                          RuntimeWarning)
        self.index = NearestNeighbors(n_neighbors=self.k).fit(self._scale(matrix))
        self.labels = np.array([f.is_friend for f in training], dtype=bool)
        return self

    def _scale(self, matrix: np.ndarray) -> np.ndarray:
        scaled = self.scaler.transform(matrix)
        scaled[:, self.constant_columns] = 0.0
        return scaled

    def vote_ratios(self, queries: np.ndarray) -> np.ndarray:
        if self.index is None:
            raise DataError("kNN classifier used before fit")
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        _, neighbors = self.index.kneighbors(self._scale(queries))
        return self.labels[neighbors].mean(axis=1)

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return self.vote_ratios(queries) > 0.5


def knn_friend_classifier(training: Sequence[PairFeatures], k: int,
                          query: Tuple[float, float]) -> Tuple[bool, float]:
    """Classify one (avg_distance_km, checkin_similarity) query; returns (is_friend, vote ratio)."""
    ratio = float(KnnFriendClassifier(k).fit(training).vote_ratios([query])[0])
    return ratio > 0.5, ratio


def knn_holdout_accuracy(features: Sequence[PairFeatures], k: int = config.KNN_NEIGHBORS,
                         test_fraction: float = 0.25, rng_seed: int = config.DEFAULT_SEED) -> float:
    train, test = train_test_split(list(features), test_size=test_fraction, random_state=rng_seed)
    classifier = KnnFriendClassifier(k).fit(train)
    predicted = classifier.predict(_feature_matrix(test))
    actual = np.array([f.is_friend for f in test], dtype=bool)
    return float(np.mean(predicted == actual))


def pair_feature_frame(features: Sequence[PairFeatures],
                       classifier: Optional[KnnFriendClassifier] = None) -> pd.DataFrame:
    frame = pd.DataFrame([{
        "user_a": f.user_a,
        "user_b": f.user_b,
        "avg_distance_km": f.avg_distance_km,
        "checkin_similarity": f.checkin_similarity,
        "is_friend": f.is_friend,
    } for f in features], columns=["user_a", "user_b", "avg_distance_km", "checkin_similarity", "is_friend"])
    if classifier is not None and len(frame):
        ratios = classifier.vote_ratios(_feature_matrix(features))
        frame["knn_vote_ratio"] = ratios
        frame["knn_predicted_friend"] = ratios > 0.5
    return frame
