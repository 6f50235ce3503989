#!/usr/bin/env python3
"""
Tests for BFS crawling, degree-weighted sampling and the collision-count
population estimator.
"""

from math import comb

import networkx as nx
import numpy as np
import pytest

from src.analysis.population import (
    SampleRun,
    _DegreeSampler,
    bfs_degree_bias,
    bfs_sample,
    degree_sampling_fit_test,
    degree_weighted_sample,
    draw_sample_run,
    estimate_population,
    estimate_spread,
    repeated_estimates,
)
from src.fetching.checkin_store import SocialGraph
from src.fetching.mock_data import erdos_renyi_graph
from src.utils.errors import DataError, InsufficientCollisionsError


def star_graph(leaves=5):
    return SocialGraph.from_networkx(nx.star_graph(["hub"] + [f"leaf{i}" for i in range(leaves)]))


def test_bfs_budget_one_is_seed_only():
    graph = star_graph()
    assert bfs_sample(graph, "hub", 1, rng_seed=3) == ["hub"]


def test_bfs_on_path_is_forced():
    graph = SocialGraph.from_networkx(nx.path_graph(["a", "b", "c"]))
    assert bfs_sample(graph, "a", 3, rng_seed=0) == ["a", "b", "c"]


def test_bfs_star_is_reproducible():
    graph = star_graph()
    first = bfs_sample(graph, "hub", 4, rng_seed=11)
    assert first[0] == "hub"
    assert len(set(first)) == 4
    assert all(u.startswith("leaf") for u in first[1:])
    assert bfs_sample(graph, "hub", 4, rng_seed=11) == first


def test_bfs_visits_each_node_once_along_edges():
    graph = erdos_renyi_graph(300, 4, seed=8)
    seed_user = max(graph.sorted_users(), key=graph.degree)
    order = bfs_sample(graph, seed_user, 120, rng_seed=2)
    assert len(order) == len(set(order))
    for position, user in enumerate(order[1:], start=1):
        assert any(graph.are_friends(user, earlier) for earlier in order[:position])


def test_bfs_rejects_unknown_seed_and_bad_budget():
    graph = star_graph()
    with pytest.raises(DataError):
        bfs_sample(graph, "nobody", 3, rng_seed=0)
    with pytest.raises(DataError):
        bfs_sample(graph, "hub", 0, rng_seed=0)


def test_bfs_from_hub_over_samples_high_degree():
    graph = star_graph()
    assert bfs_degree_bias(graph, ["hub"]) > 1.0


def test_degree_weighted_draws_single_edge():
    graph = SocialGraph.from_networkx(nx.Graph([("a", "b")]))
    sampler = _DegreeSampler(graph)
    picks = sampler.draw(10000, np.random.default_rng(5))
    assert abs(np.mean(picks == sampler.nodes.index("a")) - 0.5) < 0.02


def test_degree_weighted_draws_star_center_half():
    graph = star_graph()
    sampler = _DegreeSampler(graph)
    picks = sampler.draw(10000, np.random.default_rng(6))
    assert abs(np.mean(picks == sampler.nodes.index("hub")) - 0.5) < 0.02
    assert degree_sampling_fit_test(graph, 10000, rng_seed=6)["draws"] == 10000


def test_degree_sampling_passes_goodness_of_fit():
    graph = erdos_renyi_graph(100, 6, seed=4)
    result = degree_sampling_fit_test(graph, 20000, rng_seed=12)
    assert result["fits_degree_distribution"]
    assert result["chi2_pvalue"] > 0.01


def test_degree_weighted_sample_rejects_empty_size():
    with pytest.raises(DataError):
        degree_weighted_sample(star_graph(), 0, rng_seed=0)
    assert degree_weighted_sample(star_graph(), 3, rng_seed=0) <= star_graph().users


def test_estimate_on_identical_full_samples_matches_formula():
    cycle = SocialGraph.from_networkx(nx.cycle_graph(["a", "b", "c", "d"]))
    everyone = frozenset(cycle.users)
    run = SampleRun([everyone, everyone], {u: cycle.degree(u) for u in everyone})
    estimate = estimate_population(run)
    degree_total, inverse_total, collisions = 16.0, 4.0, 4
    assert estimate.collisions == collisions
    assert estimate.n_hat == pytest.approx(comb(2, 2) * degree_total * inverse_total / (2 ** 2 * collisions))
    assert estimate.n_hat == pytest.approx(4.0)
    assert estimate.n_hat_approx == pytest.approx(degree_total * inverse_total / (2 * collisions))


def test_no_collisions_is_an_error():
    run = SampleRun([frozenset({"a"}), frozenset({"b"})], {"a": 1, "b": 1})
    with pytest.raises(InsufficientCollisionsError):
        estimate_population(run)


def test_sample_run_needs_two_samples():
    with pytest.raises(DataError):
        SampleRun([frozenset({"a"})], {"a": 1})


def test_draw_sample_run_is_deterministic():
    graph = erdos_renyi_graph(200, 6, seed=1)
    first = draw_sample_run(graph, 5, 20, rng_seed=9)
    second = draw_sample_run(graph, 5, 20, rng_seed=9)
    assert first.samples == second.samples


def test_erdos_renyi_population_within_twenty_percent():
    graph = erdos_renyi_graph(1000, 10, seed=2024)
    estimates = repeated_estimates(graph, repeats=20, r=30, sample_size=50, rng_seed=17)
    assert list(estimates.columns) == ["repeat", "r", "sample_size", "collisions",
                                       "mean_degree_sum", "n_hat", "n_hat_approx"]
    spread = estimate_spread(estimates)
    assert spread["runs"] == 20
    assert 800 <= spread["median"] <= 1200


def test_estimate_grows_with_population():
    medians = []
    for n in (1000, 2000):
        graph = erdos_renyi_graph(n, 10, seed=31)
        estimates = repeated_estimates(graph, repeats=10, r=30, sample_size=50, rng_seed=5)
        medians.append(estimate_spread(estimates)["median"])
    assert medians[1] > medians[0]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
