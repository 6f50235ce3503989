# File: src/commands/ingest.py

"""ingest: checkin + edge files (or a synthetic corpus) -> Parquet snapshot and data summary."""

import io
import logging

import pandas as pd

from src.analysis.summary import summarize, summary_table
from src.commands.common import Outputs, read_tracked, resolve_settings
from src.fetching import mock_data
from src.fetching.checkin_store import CheckinFormat, SocialGraph
from src.utils.errors import UsageError
from src.utils.files import RunManifest
from src.utils.rng import derive_seed

logger = logging.getLogger(__name__)

MOCK_CORPORA = ("hotspot", "erdos-renyi", "decay")


def configure(parser) -> None:
    parser.add_argument("--checkins", help="Delimited checkin file (user, time, lat, lng, location id)")
    parser.add_argument("--edges", help="Friendship edge list, two user ids per line")
    parser.add_argument("--columns", help="Comma-separated checkin column names, e.g. user,timestamp,lat,lng")
    parser.add_argument("--header", action="store_true", help="Checkin file starts with a header row")
    parser.add_argument("--mock", choices=MOCK_CORPORA, help="Generate a synthetic corpus instead of reading files")
    parser.add_argument("--mock-users", type=int, default=1000, help="Users in the synthetic corpus")
    parser.add_argument("--snapshot", help="Snapshot path (default: <out-dir>/snapshot.parquet)")


def _mock_graph(name: str, users: int, seed: int) -> SocialGraph:
    seed = derive_seed(seed, f"mock-{name}")
    if name == "hotspot":
        return mock_data.hotspot_corpus(users=users, seed=seed)
    if name == "erdos-renyi":
        return mock_data.erdos_renyi_graph(users, 10, seed)
    return mock_data.distance_decay_graph(users, 200.0, seed)


def run(args) -> None:
    settings = resolve_settings(args, {"seed": args.seed})
    manifest = RunManifest("ingest", config=dict(settings), seeds={"seed": settings["seed"]})
    outputs = Outputs(args.out_dir, manifest)

    if args.mock and (args.checkins or args.edges):
        raise UsageError("--mock cannot be combined with --checkins/--edges")

    rejected = []
    if args.mock:
        manifest.config.update({"mock": args.mock, "mock_users": args.mock_users})
        graph = _mock_graph(args.mock, args.mock_users, settings["seed"])
    else:
        if not (args.checkins or args.edges):
            raise UsageError("ingest needs --checkins and/or --edges (or --mock)")
        graph = SocialGraph()
        if args.checkins:
            fmt = CheckinFormat.default()
            if args.columns:
                fmt = CheckinFormat.from_names(args.columns.split(","), fmt.separator, args.header)
            elif args.header:
                fmt.header = True
            data = read_tracked(args.checkins, manifest)
            report = graph.ingest_checkins(io.StringIO(data.decode("utf-8"), newline=""), fmt)
            rejected = report.rejected
            logger.info("Ingested %d checkins (%d rejected)", report.accepted, report.rejected_count)
        if args.edges:
            data = read_tracked(args.edges, manifest)
            edges = graph.ingest_edges(io.StringIO(data.decode("utf-8"), newline=""))
            logger.info("Ingested %d friendships (%d duplicates, %d self-loops)",
                        edges.accepted, edges.duplicates, edges.self_loops)

    snapshot = args.snapshot or outputs.path("snapshot.parquet")
    outputs.record(graph.save_snapshot(snapshot))
    outputs.write_frame("summary.csv", summary_table(summarize(graph)))
    outputs.write_frame("rejected_rows.csv", pd.DataFrame(rejected, columns=["row", "reason"]))
    outputs.finish()
