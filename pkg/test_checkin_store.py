#!/usr/bin/env python3
"""
Tests for checkin/edge ingestion and the Parquet snapshot.
"""

import io
import logging
from pathlib import Path

import networkx as nx
import pytest

from src.analysis.geo import GeoPoint
from src.fetching.checkin_store import Checkin, CheckinFormat, SocialGraph
from src.utils.errors import DataError, FormatMismatchError

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def small_graph():
    graph = SocialGraph()
    graph.ingest_checkins(FIXTURES / "checkins_small.txt")
    graph.ingest_edges(FIXTURES / "edges_small.txt")
    return graph


def test_ingest_checkins_skips_malformed_rows():
    graph = SocialGraph()
    report = graph.ingest_checkins(FIXTURES / "checkins_small.txt")
    assert report.accepted == 8
    assert [row for row, _ in report.rejected] == [6, 8]
    assert "timestamp" in report.rejected[0][1]
    assert graph.checkin_count == 8
    assert graph.sorted_users() == ["alice", "bob", "carol"]


def test_rejected_rows_keep_their_file_line_numbers():
    text = (
        "alice\t2010-10-17T10:00:00Z\t42.3505\t-71.1054\tbu\n"
        "\n"
        "bob\t2010-10-17T11:00:00Z\t42.3505\t-71.1054\tbu\n"
        "bob\tnot-a-time\t42.0\t-71.0\tx\n"
        "carol\t2010-10-22T09:30:00Z\t40.7711\t-73.9803\tcpw\n"
    )
    report = SocialGraph().ingest_checkins(io.StringIO(text))
    assert report.accepted == 3
    assert report.rejected == [(4, "unparseable timestamp 'not-a-time'")]

    with_header = "user,when,lat,lng\n\n\nzoe,bad,1.0,2.0\nzoe,2010-10-17T10:00:00Z,1.0,2.0\nzoe,2010-10-18T10:00:00Z,1.0,2.0\n"
    fmt = CheckinFormat.from_names(["user", "timestamp", "lat", "lng"], separator=",", header=True)
    report = SocialGraph().ingest_checkins(io.StringIO(with_header), fmt)
    assert [row for row, _ in report.rejected] == [4]

    edges = SocialGraph().ingest_edges(io.StringIO("a\tb\n\nlonely\n"))
    assert edges.rejected == [(3, "expected two user ids")]


def test_skipped_rows_are_logged_not_printed(caplog, capsys):
    with caplog.at_level(logging.WARNING, logger="src.fetching.checkin_store"):
        SocialGraph().ingest_checkins(FIXTURES / "checkins_small.txt")
    warnings = [r for r in caplog.records if r.name == "src.fetching.checkin_store"]
    assert [r.getMessage() for r in warnings] == ["Skipped 2 malformed checkin rows of 10"]
    assert capsys.readouterr().out == ""


def test_checkins_are_time_ordered_per_user(small_graph):
    alice = small_graph.user_checkins("alice")
    assert [c.time.day for c in alice] == [17, 18, 19, 20]
    assert alice[-1].location_id == "cpw"
    assert small_graph.is_time_ordered()


def test_ingest_edges_dedupes_and_drops_self_loops():
    graph = SocialGraph()
    report = graph.ingest_edges(FIXTURES / "edges_small.txt")
    assert (report.accepted, report.duplicates, report.self_loops) == (3, 1, 1)
    assert graph.sorted_edges() == [("alice", "bob"), ("alice", "carol"), ("alice", "dave")]
    assert graph.are_friends("bob", "alice")
    assert not graph.are_friends("bob", "carol")
    assert graph.friends("alice") == ["bob", "carol", "dave"]
    assert graph.degree("carol") == 1


def test_reingesting_edges_changes_nothing(small_graph):
    before = small_graph.sorted_edges()
    report = small_graph.ingest_edges(FIXTURES / "edges_small.txt")
    assert report.accepted == 0
    assert small_graph.sorted_edges() == before
    assert small_graph.sorted_users() == ["alice", "bob", "carol", "dave"]


def test_users_from_edges_without_checkins(small_graph):
    assert small_graph.sorted_users() == ["alice", "bob", "carol", "dave"]
    assert small_graph.user_checkins("dave") == []


def test_unknown_user_raises(small_graph):
    with pytest.raises(DataError):
        small_graph.user_checkins("erin")


def test_wrong_column_mapping_is_a_format_mismatch():
    graph = SocialGraph()
    fmt = CheckinFormat.from_names(["user", "lat", "timestamp", "lng", "location_id"])
    with pytest.raises(FormatMismatchError):
        graph.ingest_checkins(FIXTURES / "checkins_small.txt", fmt)
    assert graph.checkin_count == 0


def test_column_mapping_with_header_and_comma_separator():
    text = "when,who,latitude,longitude\n2010-10-17T10:00:00Z,zoe,1.5,2.5\n"
    fmt = CheckinFormat.from_names(["timestamp", "user", "lat", "lng"], separator=",", header=True)
    graph = SocialGraph()
    report = graph.ingest_checkins(io.StringIO(text), fmt)
    assert report.accepted == 1
    checkin = graph.user_checkins("zoe")[0]
    assert checkin.point == GeoPoint(1.5, 2.5)
    assert checkin.location_id is None
    assert checkin.timestamp == 1287309600


def test_column_mapping_requires_core_columns():
    with pytest.raises(DataError):
        CheckinFormat.from_names(["user", "timestamp", "lat"])


def test_from_networkx_keeps_isolated_nodes():
    graph = SocialGraph.from_networkx(nx.path_graph(3))
    graph.add_user("lonely")
    assert graph.edge_count == 2
    assert "lonely" in graph.users
    assert graph.degree("lonely") == 0


def test_snapshot_preserves_users_edges_and_checkins(small_graph, tmp_path):
    path = small_graph.save_snapshot(tmp_path / "snapshot.parquet")
    loaded = SocialGraph.load_snapshot(path)
    assert loaded.sorted_users() == small_graph.sorted_users()
    assert loaded.sorted_edges() == small_graph.sorted_edges()
    assert loaded.checkin_frame().equals(small_graph.checkin_frame())
    assert small_graph.to_snapshot_bytes() == loaded.to_snapshot_bytes()


def test_add_checkins_restores_order():
    graph = SocialGraph()
    point = GeoPoint(0.0, 0.0)
    graph.add_checkins([Checkin("u", 20, point), Checkin("u", 10, point)])
    assert [c.timestamp for c in graph.user_checkins("u")] == [10, 20]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
