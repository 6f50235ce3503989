#!/usr/bin/env python3
"""
Full-scale check: 15 friends clustered around shared hotspots against 15
random waypoint nodes on a 2000 m x 2000 m field for 10,000 s.
"""

import warnings

import numpy as np
import pytest

from src.fetching.mock_data import hotspot_corpus
from src.mobility.markov_model import build_mobility_model, project_models
from src.mobility.traces import RwpConfig, SpeedPolicy, generate_fmm_traces, generate_rwp_traces
from src.mobility.validation import within_hull
from src.simulation.contention import SimConfig, compare_models, run_simulation
from src.utils.rng import derive_seed

NODES = 15
FIELD = 2000.0
DURATION = 10000.0
SEEDS = range(10)


def fmm_traces(seed):
    graph = hotspot_corpus(users=NODES, seed=derive_seed(seed, "corpus"))
    models = [build_mobility_model(u, graph.checkins[u]) for u in graph.sorted_users()]
    models, _ = project_models(models, FIELD, FIELD)
    traces = generate_fmm_traces(models, DURATION, SpeedPolicy(speed=5.0), derive_seed(seed, "fmm"))
    return models, traces


def rwp_traces(seed):
    cfg = RwpConfig(width=FIELD, height=FIELD, min_speed=0.0, max_speed=5.0, pause_time=0.0, duration=DURATION)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return generate_rwp_traces(cfg, NODES, derive_seed(seed, "rwp"))


def sim_config(seed):
    return SimConfig(duration=DURATION, width=FIELD, height=FIELD, node_count=NODES,
                     radio_range=250.0, tick=1.0, rng_seed=seed)


def test_fmm_waypoints_stay_inside_their_state_hull():
    for seed in (0, 1):
        models, fmm = fmm_traces(seed)
        for model, trace in zip(models, fmm):
            points = [[w.x, w.y] for w in trace]
            assert within_hull(points, model.field_positions).all()


def test_clustered_friends_congest_more_than_random_waypoint():
    ratios = []
    wins = 0
    for seed in SEEDS:
        _, fmm = fmm_traces(seed)
        comparison = compare_models(fmm, rwp_traces(seed), sim_config(seed))
        wins += comparison.fmm.total_backoffs > comparison.rwp.total_backoffs
        ratios.append(comparison.ratio)
    assert wins >= 9
    assert 1.5 <= float(np.median(ratios)) <= 5.0


def test_random_waypoint_congestion_is_centred():
    centred = 0
    for seed in SEEDS:
        report = run_simulation(rwp_traces(seed), sim_config(seed))
        center, border = report.grid.center_vs_border()
        centred += center >= 2 * border
    assert centred >= 9


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
