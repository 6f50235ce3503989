#!/usr/bin/env python3
"""
Tests for the corpus summary table against a hand-computed oracle.
"""

import datetime
import math
from pathlib import Path

import pytest

from src.analysis.geo import GeoPoint, haversine_distance
from src.analysis.summary import summarize, summary_table
from src.fetching.checkin_store import Checkin, SocialGraph

FIXTURES = Path(__file__).parent / "fixtures"
BU_TO_CPW_KM = haversine_distance(GeoPoint(42.3505, -71.1054), GeoPoint(40.7711, -73.9803))


@pytest.fixture
def summary():
    graph = SocialGraph()
    graph.ingest_checkins(FIXTURES / "checkins_small.txt")
    graph.ingest_edges(FIXTURES / "edges_small.txt")
    return summarize(graph)


def test_counts(summary):
    assert summary.user_count == 4
    assert summary.checkin_count == 8
    assert summary.edge_count == 3
    assert summary.directed_friend_count == 6


def test_per_user_statistics(summary):
    assert summary.checkins_mean == pytest.approx(2.0)
    assert summary.checkins_std == pytest.approx(math.sqrt(2.0))
    assert summary.friends_mean == pytest.approx(1.5)
    assert summary.friends_std == pytest.approx(math.sqrt(0.75))


def test_weekday_uses_sunday_zero(summary):
    # 2010-10-17 was a Sunday
    assert summary.earliest_checkin == datetime.date(2010, 10, 17)
    assert summary.weekday_mean == pytest.approx(19 / 8)


def test_intervals_and_distances(summary):
    assert summary.interval_days_mean == pytest.approx(6.125 / 5)
    assert summary.distance_km_total == pytest.approx(BU_TO_CPW_KM)
    assert summary.distance_km_mean == pytest.approx(BU_TO_CPW_KM / 5)


def test_summary_table_layout(summary):
    table = summary_table(summary)
    assert list(table.columns) == ["metric", "mean", "std", "total"]
    assert list(table["metric"]) == ["Users", "Checkins", "Friends", "DirectedFriends", "Weekday", "Distance", "Time"]
    weekday = table.set_index("metric").loc["Weekday"]
    assert weekday["total"] == "2010-10-17"


def test_two_checkins_twelve_hours_apart_in_one_place():
    graph = SocialGraph()
    place = GeoPoint(42.3505, -71.1054)
    graph.add_checkins([Checkin("u", 1287300000, place), Checkin("u", 1287300000 + 43200, place)])
    single = summarize(graph)
    assert single.interval_days_mean == pytest.approx(0.5)
    assert single.distance_km_mean == 0.0
    assert single.checkin_count == sum(len(graph.user_checkins(u)) for u in graph.sorted_users())


def test_empty_graph_has_no_moments():
    empty = summarize(SocialGraph())
    assert empty.user_count == 0
    assert empty.checkins_mean is None
    assert empty.earliest_checkin is None
    assert empty.distance_km_total == 0.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
