# File: src/fetching/checkin_store.py

"""
Checkin corpus and friendship graph store.

Replaces live crawling: corpora are ingested from tab-separated dumps laid
out like the public Gowalla snapshot (user, ISO-8601 time, lat, lng,
location id) and persisted as a single Parquet snapshot.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, TextIO, Tuple, Union

import networkx as nx
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq

import src.config as config
from src.analysis.geo import GeoPoint
from src.utils.errors import DataError, FormatMismatchError
from src.utils.files import atomic_write_bytes

logger = logging.getLogger(__name__)

SNAPSHOT_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class Checkin:
    user_id: str
    timestamp: int  # UTC epoch seconds
    point: GeoPoint
    location_id: Optional[str] = None

    @property
    def time(self) -> pd.Timestamp:
        return pd.Timestamp(self.timestamp, unit="s", tz="UTC")


@dataclass
class CheckinFormat:
    """Column positions of a delimited checkin file. location_id may be None."""
    user: int = 0
    timestamp: int = 1
    lat: int = 2
    lng: int = 3
    location_id: Optional[int] = 4
    separator: str = "\t"
    header: bool = False

    @classmethod
    def from_names(cls, names: List[str], separator: str = "\t", header: bool = False) -> "CheckinFormat":
        """Build a format from an ordered list of column names (unknown names are skipped columns)."""
        positions = {name: index for index, name in enumerate(names)}
        missing = [name for name in ("user", "timestamp", "lat", "lng") if name not in positions]
        if missing:
            raise DataError(f"Checkin column mapping lacks required columns: {', '.join(missing)}")
        return cls(
            user=positions["user"],
            timestamp=positions["timestamp"],
            lat=positions["lat"],
            lng=positions["lng"],
            location_id=positions.get("location_id"),
            separator=separator,
            header=header,
        )

    @classmethod
    def default(cls) -> "CheckinFormat":
        return cls.from_names(config.CHECKIN_COLUMNS, separator=config.CHECKIN_SEPARATOR)


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


@dataclass
class EdgeReport:
    accepted: int = 0
    duplicates: int = 0
    self_loops: int = 0
    rejected: List[Tuple[int, str]] = field(default_factory=list)


def _read_rows(source: TextIO, separator: str) -> List[Tuple[int, List[str]]]:
    """Non-blank rows paired with the 1-based file line they start on."""
    reader = csv.reader(source, delimiter=separator)
    rows = []
    line = 1
    for row in reader:
        if row and any(cell.strip() for cell in row):
            rows.append((line, row))
        line = reader.line_num + 1
    return rows


def _parse_timestamps(values: pd.Series) -> pd.Series:
    parsed = pd.to_datetime(values, utc=True, errors="coerce", format="ISO8601")
    return parsed


class SocialGraph:
    """
    Users, undirected friendships and per-user time-ordered checkins.

    Single writer: mutate only through the ingest_* methods; once loading is
    done the instance is treated as read-only.
    """

    def __init__(self):
        self.users: Set[str] = set()
        self.friendships = nx.Graph()
        self.checkins: Dict[str, List[Checkin]] = {}

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    def add_user(self, user_id: str) -> None:
        if user_id not in self.users:
            self.users.add(user_id)
            self.friendships.add_node(user_id)
            self.checkins[user_id] = []

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "SocialGraph":
        social = cls()
        for node in sorted(graph.nodes, key=str):
            social.add_user(str(node))
        for a, b in graph.edges:
            if a != b:
                social.friendships.add_edge(str(a), str(b))
        return social

    def add_checkins(self, checkins: Iterable[Checkin]) -> int:
        """Append already-validated checkins and restore per-user ordering."""
        touched = set()
        count = 0
        for checkin in checkins:
            self.add_user(checkin.user_id)
            self.checkins[checkin.user_id].append(checkin)
            touched.add(checkin.user_id)
            count += 1
        for user_id in touched:
            # stable: ties keep ingestion order
            self.checkins[user_id].sort(key=lambda c: c.timestamp)
        return count

    # ------------------------------------------------------------------
    # Ingestion
    # ------------------------------------------------------------------

    def ingest_checkins(self, source: Union[TextIO, str, Path],
                        fmt: Optional[CheckinFormat] = None) -> IngestReport:
        """
        Parse a delimited checkin stream. Malformed rows are skipped and
        reported by 1-based file line; if more than half of the rows are
        rejected nothing is stored and FormatMismatchError is raised.
        """
        fmt = fmt or CheckinFormat.default()
        if isinstance(source, (str, Path)):
            with open(source, "r", encoding="utf-8", newline="") as handle:
                return self.ingest_checkins(handle, fmt)

        rows = _read_rows(source, fmt.separator)
        if fmt.header:
            rows = rows[1:]
        report = IngestReport()
        if not rows:
            return report

        required = max(fmt.user, fmt.timestamp, fmt.lat, fmt.lng)
        records = []
        for row_number, row in rows:
            if len(row) <= required:
                report.rejected.append((row_number, f"expected at least {required + 1} columns, got {len(row)}"))
                continue
            location = None
            if fmt.location_id is not None and fmt.location_id < len(row):
                location = row[fmt.location_id].strip() or None
            records.append({
                "row": row_number,
                "user": row[fmt.user].strip(),
                "timestamp": row[fmt.timestamp].strip(),
                "lat": row[fmt.lat].strip(),
                "lng": row[fmt.lng].strip(),
                "location_id": location,
            })

        df = pd.DataFrame.from_records(records, columns=["row", "user", "timestamp", "lat", "lng", "location_id"])
        df["time"] = _parse_timestamps(df["timestamp"])
        df["lat_value"] = pd.to_numeric(df["lat"], errors="coerce")
        df["lng_value"] = pd.to_numeric(df["lng"], errors="coerce")

        accepted = []
        for rec in df.itertuples(index=False):
            reason = None
            if not rec.user:
                reason = "empty user id"
            elif pd.isna(rec.time):
                reason = f"unparseable timestamp {rec.timestamp!r}"
            elif pd.isna(rec.lat_value) or not math.isfinite(rec.lat_value):
                reason = f"invalid latitude {rec.lat!r}"
            elif pd.isna(rec.lng_value) or not math.isfinite(rec.lng_value):
                reason = f"invalid longitude {rec.lng!r}"
            if reason is None:
                try:
                    point = GeoPoint(float(rec.lat_value), float(rec.lng_value))
                except DataError as exc:
                    reason = str(exc)
            if reason is not None:
                report.rejected.append((rec.row, reason))
                continue
            accepted.append(Checkin(rec.user, math.floor(rec.time.timestamp()), point, rec.location_id))

        report.rejected.sort()
        total = len(rows)
        for row_number, reason in report.rejected:
            logger.debug("Rejected checkin row %d: %s", row_number, reason)
        if report.rejected_count > config.MAX_REJECTED_FRACTION * total:
            raise FormatMismatchError(
                f"{report.rejected_count} of {total} checkin rows rejected; "
                f"check the column mapping (first problem: row {report.rejected[0][0]}: {report.rejected[0][1]})"
            )
        if report.rejected:
            logger.warning("Skipped %d malformed checkin rows of %d", report.rejected_count, total)
        report.accepted = self.add_checkins(accepted)
        return report

    def ingest_edges(self, source: Union[TextIO, str, Path], separator: str = "\t") -> EdgeReport:
        """Undirected, deduplicated friendships. Self-loops are dropped and counted."""
        if isinstance(source, (str, Path)):
            with open(source, "r", encoding="utf-8", newline="") as handle:
                return self.ingest_edges(handle, separator)

        report = EdgeReport()
        for row_number, row in _read_rows(source, separator):
            if len(row) < 2 or not row[0].strip() or not row[1].strip():
                report.rejected.append((row_number, "expected two user ids"))
                continue
            a, b = row[0].strip(), row[1].strip()
            if a == b:
                report.self_loops += 1
                self.add_user(a)
                continue
            self.add_user(a)
            self.add_user(b)
            if self.friendships.has_edge(a, b):
                report.duplicates += 1
                continue
            self.friendships.add_edge(a, b)
            report.accepted += 1
        if report.rejected:
            logger.warning("Skipped %d malformed edge rows", len(report.rejected))
        return report

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def edges(self) -> Set[frozenset]:
        return {frozenset(edge) for edge in self.friendships.edges}

    @property
    def edge_count(self) -> int:
        return self.friendships.number_of_edges()

    @property
    def checkin_count(self) -> int:
        return sum(len(items) for items in self.checkins.values())

    def sorted_users(self) -> List[str]:
        return sorted(self.users)

    def sorted_edges(self) -> List[Tuple[str, str]]:
        return sorted(tuple(sorted(edge)) for edge in self.friendships.edges)

    def require_user(self, user_id: str) -> None:
        if user_id not in self.users:
            raise DataError(f"Unknown user {user_id!r}")

    def user_checkins(self, user_id: str) -> List[Checkin]:
        self.require_user(user_id)
        return self.checkins[user_id]

    def are_friends(self, a: str, b: str) -> bool:
        return self.friendships.has_edge(a, b)

    def friends(self, user_id: str) -> List[str]:
        self.require_user(user_id)
        return sorted(self.friendships.neighbors(user_id))

    def degree(self, user_id: str) -> int:
        return self.friendships.degree(user_id)

    def is_time_ordered(self) -> bool:
        """Full scan: every per-user sequence is non-decreasing in time."""
        return all(
            all(items[i].timestamp <= items[i + 1].timestamp for i in range(len(items) - 1))
            for items in self.checkins.values()
        )

    def checkin_frame(self) -> pd.DataFrame:
        rows = [
            {"user": c.user_id, "timestamp": c.timestamp, "lat": c.point.lat,
             "lng": c.point.lng, "location_id": c.location_id}
            for user_id in self.sorted_users() for c in self.checkins[user_id]
        ]
        return pd.DataFrame(rows, columns=["user", "timestamp", "lat", "lng", "location_id"])

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_table(self) -> pa.Table:
        kinds, users, others, stamps, lats, lngs, locations = [], [], [], [], [], [], []

        def add(kind, user, other=None, stamp=None, lat=None, lng=None, location=None):
            kinds.append(kind)
            users.append(user)
            others.append(other)
            stamps.append(stamp)
            lats.append(lat)
            lngs.append(lng)
            locations.append(location)

        for user_id in self.sorted_users():
            add("user", user_id)
        for a, b in self.sorted_edges():
            add("edge", a, b)
        for user_id in self.sorted_users():
            for c in self.checkins[user_id]:
                add("checkin", user_id, None, c.timestamp, c.point.lat, c.point.lng, c.location_id)

        schema = pa.schema([
            ("kind", pa.string()),
            ("user", pa.string()),
            ("other", pa.string()),
            ("timestamp", pa.int64()),
            ("lat", pa.float64()),
            ("lng", pa.float64()),
            ("location_id", pa.string()),
        ], metadata={"fmm_snapshot_version": SNAPSHOT_FORMAT_VERSION})
        return pa.table([kinds, users, others, stamps, lats, lngs, locations], schema=schema)

    def to_snapshot_bytes(self) -> bytes:
        buffer = io.BytesIO()
        pq.write_table(self.to_table(), buffer, compression="snappy")
        return buffer.getvalue()

    def save_snapshot(self, path: Union[str, Path]) -> Path:
        return atomic_write_bytes(path, self.to_snapshot_bytes())

    @classmethod
    def from_table(cls, table: pa.Table) -> "SocialGraph":
        metadata = table.schema.metadata or {}
        version = metadata.get(b"fmm_snapshot_version")
        if version != SNAPSHOT_FORMAT_VERSION.encode():
            raise DataError(f"Unsupported snapshot version {version!r}")
        graph = cls()
        columns = table.to_pydict()
        checkins = []
        for kind, user, other, stamp, lat, lng, location in zip(
                columns["kind"], columns["user"], columns["other"], columns["timestamp"],
                columns["lat"], columns["lng"], columns["location_id"]):
            if kind == "user":
                graph.add_user(user)
            elif kind == "edge":
                graph.add_user(user)
                graph.add_user(other)
                graph.friendships.add_edge(user, other)
            elif kind == "checkin":
                checkins.append(Checkin(user, int(stamp), GeoPoint(lat, lng), location))
            else:
                raise DataError(f"Unknown snapshot record kind {kind!r}")
        graph.add_checkins(checkins)
        return graph

    @classmethod
    def load_snapshot(cls, source: Union[str, Path, bytes]) -> "SocialGraph":
        if isinstance(source, bytes):
            source = io.BytesIO(source)
        return cls.from_table(pq.read_table(source))
