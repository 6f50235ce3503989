# File: src/analysis/summary.py

"""Corpus-level statistics in the shape of the Gowalla data summary table."""

import datetime
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.analysis.geo import haversine_km
from src.fetching.checkin_store import SocialGraph

SECONDS_PER_DAY = 86400.0


@dataclass
class DatasetSummary:
    user_count: int
    checkin_count: int
    edge_count: int
    directed_friend_count: int
    checkins_mean: Optional[float]
    checkins_std: Optional[float]
    friends_mean: Optional[float]
    friends_std: Optional[float]
    weekday_mean: Optional[float]
    weekday_std: Optional[float]
    earliest_checkin: Optional[datetime.date]
    interval_days_mean: Optional[float]
    interval_days_std: Optional[float]
    distance_km_mean: Optional[float]
    distance_km_std: Optional[float]
    distance_km_total: float

    def to_dict(self) -> dict:
        return asdict(self)


def _mean_std(values):
    """Population mean/std, or (None, None) for an empty sample."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return None, None
    return float(values.mean()), float(values.std(ddof=0))


def summarize(graph: SocialGraph) -> DatasetSummary:
    """
    Weekday is coded 0 = Sunday ... 6 = Saturday. Intervals and distances
    are taken between consecutive checkins of the same user.
    """
    users = graph.sorted_users()
    checkins_per_user = [len(graph.checkins[u]) for u in users]
    friends_per_user = [graph.degree(u) for u in users]

    frame = graph.checkin_frame()
    if frame.empty:
        weekdays = np.array([])
        earliest = None
        gaps_days = np.array([])
        distances = np.array([])
    else:
        times = pd.to_datetime(frame["timestamp"], unit="s", utc=True)
        weekdays = ((times.dt.dayofweek + 1) % 7).to_numpy()
        earliest = times.min().date()
        same_user = (frame["user"] == frame["user"].shift(-1)).to_numpy()[:-1]
        ts = frame["timestamp"].to_numpy(dtype=float)
        lats = frame["lat"].to_numpy(dtype=float)
        lngs = frame["lng"].to_numpy(dtype=float)
        gaps_days = (np.diff(ts) / SECONDS_PER_DAY)[same_user]
        distances = haversine_km(lats[:-1], lngs[:-1], lats[1:], lngs[1:])[same_user]

    checkins_mean, checkins_std = _mean_std(checkins_per_user)
    friends_mean, friends_std = _mean_std(friends_per_user)
    weekday_mean, weekday_std = _mean_std(weekdays)
    interval_mean, interval_std = _mean_std(gaps_days)
    distance_mean, distance_std = _mean_std(distances)

    return DatasetSummary(
        user_count=len(users),
        checkin_count=int(sum(checkins_per_user)),
        edge_count=graph.edge_count,
        directed_friend_count=2 * graph.edge_count,
        checkins_mean=checkins_mean,
        checkins_std=checkins_std,
        friends_mean=friends_mean,
        friends_std=friends_std,
        weekday_mean=weekday_mean,
        weekday_std=weekday_std,
        earliest_checkin=earliest,
        interval_days_mean=interval_mean,
        interval_days_std=interval_std,
        distance_km_mean=distance_mean,
        distance_km_std=distance_std,
        distance_km_total=float(distances.sum()) if distances.size else 0.0,
    )


def summary_table(summary: DatasetSummary) -> pd.DataFrame:
    """Rows Users/Checkins/Friends/Weekday/Distance/Time with mean, std and total columns."""
    rows = [
        ("Users", None, None, summary.user_count),
        ("Checkins", summary.checkins_mean, summary.checkins_std, summary.checkin_count),
        ("Friends", summary.friends_mean, summary.friends_std, summary.edge_count),
        ("DirectedFriends", None, None, summary.directed_friend_count),
        ("Weekday", summary.weekday_mean, summary.weekday_std,
         summary.earliest_checkin.isoformat() if summary.earliest_checkin else None),
        ("Distance", summary.distance_km_mean, summary.distance_km_std, summary.distance_km_total),
        ("Time", summary.interval_days_mean, summary.interval_days_std, None),
    ]
    return pd.DataFrame(rows, columns=["metric", "mean", "std", "total"])
