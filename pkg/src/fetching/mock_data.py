# File: src/fetching/mock_data.py

"""
Synthetic corpora standing in for a real checkin dump: random friendship
graphs, distance-decaying friendships and users clustered around shared
hotspots.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

import src.config as config
from src.analysis.geo import EARTH_RADIUS_M, GeoPoint, pairwise_haversine_km
from src.fetching.checkin_store import Checkin, SocialGraph
from src.utils.errors import DataError

logger = logging.getLogger(__name__)

# 2010-01-01T00:00:00Z, inside the span of the public Gowalla snapshot
BASE_TIMESTAMP = 1262304000
HOUR = 3600


def offset_to_geo(dx_m: float, dy_m: float) -> GeoPoint:
    """Metre offsets from (0, 0) on the equator; the Miller projection is locally 1:1 there."""
    return GeoPoint(math.degrees(dy_m / EARTH_RADIUS_M), math.degrees(dx_m / EARTH_RADIUS_M))


def erdos_renyi_graph(n: int, mean_degree: float, seed: int) -> SocialGraph:
    if n < 2:
        raise DataError(f"Need at least two nodes, got {n}")
    graph = nx.fast_gnp_random_graph(n, mean_degree / (n - 1), seed=seed)
    return SocialGraph.from_networkx(graph)


def distance_decay_graph(n_users: int, decay_km: float, seed: int) -> SocialGraph:
    """
    Users spread uniformly along the equator with one checkin each; each
    pair is friends with probability exp(-d / decay_km). Pair distances are
    then uniform on [0, half circumference], so the friend histogram decays
    exactly like the link probability.
    """
    rng = np.random.default_rng(seed)
    lngs = rng.uniform(-180.0, 180.0, n_users)
    users = [f"u{i:05d}" for i in range(n_users)]
    social = SocialGraph()
    social.add_checkins(
        Checkin(user, BASE_TIMESTAMP + i, GeoPoint(0.0, float(lng)))
        for i, (user, lng) in enumerate(zip(users, lngs))
    )
    distances = pairwise_haversine_km(np.zeros(n_users), lngs)
    linked = np.triu(rng.random((n_users, n_users)) < np.exp(-distances / decay_km), k=1)
    for a, b in zip(*np.nonzero(linked)):
        social.friendships.add_edge(users[a], users[b])
    logger.debug("Decay graph: %d users, %d friendships", n_users, social.edge_count)
    return social


def hotspot_centers(count: int, spread_m: float) -> List[Tuple[float, float]]:
    """Hotspot centres on a circle of radius spread_m around the origin."""
    return [
        (spread_m * math.cos(math.pi / 2 + 2 * math.pi * h / count),
         spread_m * math.sin(math.pi / 2 + 2 * math.pi * h / count))
        for h in range(count)
    ]


def _point_in_disk(rng: np.random.Generator, center: Tuple[float, float], radius: float) -> Tuple[float, float]:
    r = radius * math.sqrt(rng.random())
    angle = rng.uniform(0, 2 * math.pi)
    return center[0] + r * math.cos(angle), center[1] + r * math.sin(angle)


def hotspot_corpus(users: int = config.SIM_NODES, hotspots: int = config.MOCK_HOTSPOTS,
                   radius_m: float = config.MOCK_HOTSPOT_RADIUS_M, venues_per_hotspot: int = 3,
                   visits: int = 30, checkins_per_visit: int = config.MOCK_CHECKINS_PER_VISIT,
                   seed: int = config.DEFAULT_SEED,
                   spread_m: float = config.MOCK_HOTSPOT_SPREAD_M,
                   centers_m: Optional[Sequence[Tuple[float, float]]] = None) -> SocialGraph:
    """
    Every user makes `visits` visits; a visit picks one hotspot and checks in
    `checkins_per_visit` times, an hour apart, at that hotspot's venues.
    Venues are shared between users and carry location ids. All users are
    mutual friends.
    """
    rng = np.random.default_rng(seed)
    centers = list(centers_m) if centers_m is not None else hotspot_centers(hotspots, spread_m)
    venues = []
    for h, center in enumerate(centers):
        venues.append([(f"h{h}v{v}", offset_to_geo(*_point_in_disk(rng, center, radius_m)))
                       for v in range(venues_per_hotspot)])

    social = SocialGraph()
    names = [f"user{i:03d}" for i in range(users)]
    checkins = []
    for name in names:
        t = BASE_TIMESTAMP
        for _ in range(visits):
            hotspot = venues[int(rng.integers(len(venues)))]
            for _ in range(checkins_per_visit):
                location_id, point = hotspot[int(rng.integers(len(hotspot)))]
                checkins.append(Checkin(name, t, point, location_id))
                t += HOUR
            t += 12 * HOUR
    social.add_checkins(checkins)
    for a, b in nx.complete_graph(names).edges:
        social.friendships.add_edge(a, b)
    return social


def two_cluster_corpus(cluster_size: int, distance_km: float) -> SocialGraph:
    """
    Two co-located groups distance_km apart along the equator. Everyone is
    friends with their own group only, so every friend pair is at 0 km and
    every non-friend pair at distance_km.
    """
    social = SocialGraph()
    offset = math.degrees(distance_km / config.EARTH_RADIUS_KM)
    for group, lng in (("a", 0.0), ("b", offset)):
        names = [f"{group}{i:03d}" for i in range(cluster_size)]
        social.add_checkins(Checkin(name, BASE_TIMESTAMP, GeoPoint(0.0, lng)) for name in names)
        for a, b in nx.complete_graph(names).edges:
            social.friendships.add_edge(a, b)
    return social


def corpus_to_tsv(graph: SocialGraph) -> Tuple[str, str]:
    """Render a graph as (checkins, edges) text in the default ingest layout."""
    frame = graph.checkin_frame()
    times = frame["timestamp"].map(
        lambda ts: np.datetime_as_string(np.datetime64(int(ts), "s"), unit="s") + "Z")
    checkin_lines = [
        "\t".join([user, stamp, repr(float(lat)), repr(float(lng)), "" if pd.isna(loc) else str(loc)])
        for user, stamp, lat, lng, loc in zip(frame["user"], times, frame["lat"], frame["lng"],
                                               frame["location_id"])
    ]
    edge_lines = [f"{a}\t{b}" for a, b in graph.sorted_edges()]
    return "\n".join(checkin_lines) + "\n", "\n".join(edge_lines) + "\n"
