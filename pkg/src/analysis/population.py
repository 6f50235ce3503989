# File: src/analysis/population.py

"""
Breadth-first crawling and collision-counting population estimation.

Samples are degree-weighted: node v is drawn with probability d(v)/D. Draws
within a sample are with replacement and deduplicated into a set; I counts
the nodes shared by each pair of samples.
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from math import comb
from typing import Dict, FrozenSet, List

import numpy as np
import pandas as pd
from scipy import stats

from src.fetching.checkin_store import SocialGraph
from src.utils.errors import DataError, InsufficientCollisionsError
from src.utils.rng import stream

logger = logging.getLogger(__name__)


def bfs_sample(graph: SocialGraph, seed_user: str, budget: int, rng_seed: int) -> List[str]:
    """FIFO crawl from seed_user; each node's neighbours are shuffled once by the seeded RNG."""
    if seed_user not in graph.users:
        raise DataError(f"Unknown seed user {seed_user!r}")
    if budget < 1:
        raise DataError(f"BFS budget must be >= 1, got {budget}")
    rng = np.random.default_rng(rng_seed)
    visited = {seed_user}
    order = [seed_user]
    queue = deque([seed_user])
    while queue and len(order) < budget:
        current = queue.popleft()
        neighbors = sorted(graph.friendships.neighbors(current))
        for index in rng.permutation(len(neighbors)):
            neighbor = neighbors[index]
            if neighbor in visited:
                continue
            visited.add(neighbor)
            order.append(neighbor)
            queue.append(neighbor)
            if len(order) >= budget:
                break
    return order


def bfs_degree_bias(graph: SocialGraph, sample: List[str]) -> float:
    """Mean degree of a crawl relative to the graph mean degree (> 1 means biased to hubs)."""
    if not sample or graph.edge_count == 0:
        return float("nan")
    sample_mean = np.mean([graph.degree(u) for u in sample])
    graph_mean = 2 * graph.edge_count / len(graph.users)
    return float(sample_mean / graph_mean)


class _DegreeSampler:
    def __init__(self, graph: SocialGraph):
        self.nodes = graph.sorted_users()
        self.degrees = np.array([graph.degree(u) for u in self.nodes], dtype=float)
        total = self.degrees.sum()
        if total <= 0:
            raise DataError("Degree-weighted sampling needs at least one edge")
        self.probabilities = self.degrees / total

    def draw(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(len(self.nodes), size=size, replace=True, p=self.probabilities)


def degree_weighted_sample(graph: SocialGraph, sample_size: int, rng_seed: int) -> set:
    if sample_size < 1:
        raise DataError(f"sample_size must be >= 1, got {sample_size}")
    sampler = _DegreeSampler(graph)
    draws = sampler.draw(sample_size, np.random.default_rng(rng_seed))
    return {sampler.nodes[i] for i in draws}


def degree_sampling_fit_test(graph: SocialGraph, draws: int, rng_seed: int) -> dict:
    """Chi-square goodness of fit of single draws against d(v)/D."""
    sampler = _DegreeSampler(graph)
    picks = sampler.draw(draws, np.random.default_rng(rng_seed))
    observed = np.bincount(picks, minlength=len(sampler.nodes))
    keep = sampler.probabilities > 0
    expected = sampler.probabilities[keep] * draws
    statistic, pvalue = stats.chisquare(observed[keep], expected)
    return {
        "draws": draws,
        "chi2_statistic": float(statistic),
        "chi2_pvalue": float(pvalue),
        "fits_degree_distribution": bool(pvalue > 0.01),
    }


@dataclass
class SampleRun:
    samples: List[FrozenSet[str]]
    degrees: Dict[str, int]

    def __post_init__(self):
        if len(self.samples) < 2:
            raise DataError(f"Collision counting needs r >= 2 samples, got {len(self.samples)}")
        unknown = {u for sample in self.samples for u in sample} - set(self.degrees)
        if unknown:
            raise DataError(f"Sampled ids not in graph: {sorted(unknown)[:5]}")

    @property
    def r(self) -> int:
        return len(self.samples)

    @property
    def sample_sizes(self) -> List[int]:
        return [len(s) for s in self.samples]

    @property
    def degree_sums(self) -> np.ndarray:
        return np.array([sum(self.degrees[u] for u in s) for s in self.samples], dtype=float)

    @property
    def inverse_degree_sums(self) -> np.ndarray:
        return np.array([sum(1.0 / self.degrees[u] for u in s) for s in self.samples], dtype=float)

    @property
    def pair_collisions(self) -> List[int]:
        return [len(a & b) for a, b in itertools.combinations(self.samples, 2)]

    @property
    def collisions(self) -> int:
        return int(sum(self.pair_collisions))


def draw_sample_run(graph: SocialGraph, r: int, sample_size: int, rng_seed: int) -> SampleRun:
    """r independent samples; sample i owns the generator derived from (rng_seed, i)."""
    if r < 2:
        raise DataError(f"Collision counting needs r >= 2 samples, got {r}")
    if sample_size < 1:
        raise DataError(f"sample_size must be >= 1, got {sample_size}")
    sampler = _DegreeSampler(graph)
    samples = []
    for i in range(r):
        draws = sampler.draw(sample_size, stream(rng_seed, i))
        samples.append(frozenset(sampler.nodes[j] for j in draws))
    degrees = {u: graph.degree(u) for s in samples for u in s}
    return SampleRun(samples, degrees)


@dataclass
class PopulationEstimate:
    n_hat: float
    n_hat_approx: float
    r: int
    sample_sizes: List[int]
    collisions: int
    mean_degree_sum: float
    mean_inverse_degree_sum: float
    mean_pair_collisions: float


def estimate_population(run: SampleRun) -> PopulationEstimate:
    """
    n = C(r,2) D' D'^-1 / (r^2 I) with D', D'^-1 and I pooled over all samples
    and sample pairs; n_hat_approx is the D' D'^-1 / (2 I) form.
    """
    collisions = run.collisions
    if collisions == 0:
        raise InsufficientCollisionsError(
            f"No node appeared in more than one of the {run.r} samples; "
            "increase the sample size or the number of samples"
        )
    degree_total = float(run.degree_sums.sum())
    inverse_total = float(run.inverse_degree_sums.sum())
    pairs = comb(run.r, 2)
    n_hat = pairs * degree_total * inverse_total / (run.r ** 2 * collisions)
    n_hat_approx = degree_total * inverse_total / (2 * collisions)
    return PopulationEstimate(
        n_hat=n_hat,
        n_hat_approx=n_hat_approx,
        r=run.r,
        sample_sizes=run.sample_sizes,
        collisions=collisions,
        mean_degree_sum=float(run.degree_sums.mean()),
        mean_inverse_degree_sum=float(run.inverse_degree_sums.mean()),
        mean_pair_collisions=collisions / pairs,
    )


def repeated_estimates(graph: SocialGraph, repeats: int, r: int, sample_size: int,
                       rng_seed: int) -> pd.DataFrame:
    """One row per repeat; repeats without collisions are reported with an empty estimate."""
    rows = []
    for repeat in range(repeats):
        run = draw_sample_run(graph, r, sample_size, rng_seed=int(stream(rng_seed, repeat).integers(2**31)))
        try:
            estimate = estimate_population(run)
        except InsufficientCollisionsError:
            logger.warning("Repeat %d observed no collisions", repeat)
            rows.append({"repeat": repeat, "r": r, "sample_size": sample_size,
                         "collisions": 0, "mean_degree_sum": float(run.degree_sums.mean()),
                         "n_hat": np.nan, "n_hat_approx": np.nan})
            continue
        rows.append({"repeat": repeat, "r": r, "sample_size": sample_size,
                     "collisions": estimate.collisions,
                     "mean_degree_sum": estimate.mean_degree_sum,
                     "n_hat": estimate.n_hat, "n_hat_approx": estimate.n_hat_approx})
    return pd.DataFrame(rows)


def estimate_spread(estimates: pd.DataFrame) -> dict:
    values = estimates["n_hat"].dropna()
    if values.empty:
        return {"runs": 0, "median": None, "min": None, "max": None, "std": None}
    return {
        "runs": int(values.size),
        "median": float(values.median()),
        "min": float(values.min()),
        "max": float(values.max()),
        "std": float(values.std(ddof=0)),
    }
