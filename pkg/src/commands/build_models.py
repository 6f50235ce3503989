# File: src/commands/build_models.py

"""build-models: pick a friend group and dump its projected mobility models."""

import logging
from typing import List

import networkx as nx
import numpy as np
import pandas as pd

from src.commands.common import Outputs, load_graph, resolve_settings
from src.fetching.checkin_store import SocialGraph
from src.mobility.markov_model import build_mobility_model, dump_models, project_models
from src.utils.errors import DataError
from src.utils.files import RunManifest
from src.utils.rng import derive_seed

logger = logging.getLogger(__name__)


def configure(parser) -> None:
    parser.add_argument("--snapshot", required=True, help="Snapshot written by ingest")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--user", help="Seed user; the group is this user plus their friends")
    group.add_argument("--users", help="Explicit comma-separated user list")
    parser.add_argument("--transitive", action="store_true",
                        help="With --user, take the whole friendship component instead of direct friends")
    parser.add_argument("--merge-radius", type=float, help="Metres within which id-less checkins merge")
    parser.add_argument("--width", type=float, help="Field width in metres")
    parser.add_argument("--height", type=float, help="Field height in metres")
    parser.add_argument("--preserve-scale", action="store_const", const=True,
                        help="Keep true metres instead of stretching the group over the field")


def select_users(graph: SocialGraph, seed_user: str, transitive: bool = False) -> List[str]:
    """The seed user and their direct friends, or the full connected component."""
    graph.require_user(seed_user)
    if transitive:
        return sorted(nx.node_connected_component(graph.friendships, seed_user))
    return sorted({seed_user, *graph.friends(seed_user)})


def run(args) -> None:
    settings = resolve_settings(args, {
        "seed": args.seed,
        "merge_radius": args.merge_radius,
        "width": args.width,
        "length": args.height,
        "preserve_scale": args.preserve_scale,
    })
    seeds = {"seed": settings["seed"], "select": derive_seed(settings["seed"], "build-models-select")}
    manifest = RunManifest("build-models", config=dict(settings), seeds=seeds)
    manifest.config.update({"user": args.user, "users": args.users, "transitive": args.transitive})
    outputs = Outputs(args.out_dir, manifest)
    graph = load_graph(args.snapshot, manifest)

    if args.users:
        users = [u.strip() for u in args.users.split(",") if u.strip()]
        for user in users:
            graph.require_user(user)
    else:
        seed_user = args.user
        if seed_user is None:
            candidates = [u for u in graph.sorted_users() if graph.checkins[u]]
            if not candidates:
                raise DataError("Snapshot has no user with checkins")
            seed_user = candidates[int(np.random.default_rng(seeds["select"]).integers(len(candidates)))]
            logger.info("Randomly selected seed user %s", seed_user)
        users = select_users(graph, seed_user, args.transitive)

    skipped = [u for u in users if not graph.checkins[u]]
    if skipped:
        logger.warning("Skipping %d users without checkins: %s", len(skipped), ", ".join(skipped[:10]))
    users = [u for u in users if graph.checkins[u]]
    if not users:
        raise DataError("None of the selected users has checkins")

    models = [build_mobility_model(u, graph.checkins[u], settings["merge_radius"]) for u in users]
    models, _ = project_models(models, settings["width"], settings["length"],
                                settings["preserve_scale"])
    outputs.record(dump_models(models, outputs.path("models.json")))

    coverage = pd.DataFrame([
        {"user": m.user_id, "states": m.k, "checkins": int(m.occurrences.sum()), **vars(m.coverage())}
        for m in models
    ])
    outputs.write_frame("model_coverage.csv", coverage)
    outputs.finish()
