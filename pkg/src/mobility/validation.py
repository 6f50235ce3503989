# File: src/mobility/validation.py

"""Statistical checks on generated mobility: chain convergence, RWP stationary density, hull containment."""

import logging
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull

from src.mobility.traces import RwpConfig, Trace, positions_at
from src.utils.errors import DataError

logger = logging.getLogger(__name__)


def stationary_distribution(A: np.ndarray, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """
    Power iteration on the lazy chain (A + I) / 2, which has the same
    stationary vector as A and converges for periodic chains too.
    """
    A = np.asarray(A, dtype=float)
    k = A.shape[0]
    lazy = (A + np.eye(k)) / 2
    pi = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        updated = pi @ lazy
        if np.abs(updated - pi).sum() < tol:
            return updated / updated.sum()
        pi = updated
    logger.warning("Power iteration did not converge within %d iterations", max_iter)
    return pi / pi.sum()


def empirical_transition_matrix(visited: np.ndarray, k: int) -> np.ndarray:
    counts = np.zeros((k, k))
    np.add.at(counts, (visited[:-1], visited[1:]), 1)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)


def visit_frequencies(visited: np.ndarray, k: int) -> np.ndarray:
    return np.bincount(visited, minlength=k) / len(visited)


def _axis_cdf(u: np.ndarray, half_width: float) -> np.ndarray:
    """CDF of the 1-D RWP marginal 3/(4 a^3) (a^2 - u^2) on [-a, a]."""
    a = half_width
    return 3.0 / (4.0 * a ** 3) * (a ** 2 * u - u ** 3 / 3.0) + 0.5


def rwp_stationary_histogram(width: float, height: float, rows: int = 10, cols: int = 10) -> np.ndarray:
    """
    Expected bin masses (rows x cols, row = y band) of the product-form
    stationary density f(x, y) = 9/(16 x_m^3 y_m^3) (x^2 - x_m^2)(y^2 - y_m^2)
    in centred coordinates.
    """
    if rows < 1 or cols < 1:
        raise DataError("Histogram needs at least one row and one column")
    x_edges = np.linspace(-width / 2, width / 2, cols + 1)
    y_edges = np.linspace(-height / 2, height / 2, rows + 1)
    x_mass = np.diff(_axis_cdf(x_edges, width / 2))
    y_mass = np.diff(_axis_cdf(y_edges, height / 2))
    return np.outer(y_mass, x_mass)


def position_histogram(positions: np.ndarray, width: float, height: float,
                       rows: int = 10, cols: int = 10) -> np.ndarray:
    counts, _, _ = np.histogram2d(
        positions[:, 1], positions[:, 0],
        bins=[rows, cols], range=[[0, height], [0, width]],
    )
    total = counts.sum()
    return counts / total if total else counts


def total_variation_distance(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DataError(f"Distributions differ in support size: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def rwp_density_check(trace: Trace, cfg: RwpConfig, samples: int = 100_000,
                      rows: int = 10, cols: int = 10) -> float:
    """TV distance between positions sampled at evenly spaced times and the stationary histogram."""
    times = np.linspace(0.0, cfg.duration, samples, endpoint=False)
    observed = position_histogram(positions_at(trace, times), cfg.width, cfg.height, rows, cols)
    return total_variation_distance(observed, rwp_stationary_histogram(cfg.width, cfg.height, rows, cols))


def within_hull(points: np.ndarray, vertices: np.ndarray, tol: Optional[float] = 1e-7) -> np.ndarray:
    """
    Boolean per point: inside (or on) the convex hull of vertices. Collinear
    and single-point vertex sets are treated as a segment or a point.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vertices = np.unique(np.atleast_2d(np.asarray(vertices, dtype=float)), axis=0)
    if vertices.shape[0] == 0:
        raise DataError("Hull needs at least one vertex")
    center = vertices.mean(axis=0)
    rank = np.linalg.matrix_rank(vertices - center, tol=tol) if vertices.shape[0] > 1 else 0

    if rank == 0:
        return np.linalg.norm(points - vertices[0], axis=1) <= tol
    if rank == 1:
        _, _, vt = np.linalg.svd(vertices - center)
        direction = vt[0]
        along = (vertices - center) @ direction
        offsets = points - center
        projected = offsets @ direction
        perpendicular = np.linalg.norm(offsets - np.outer(projected, direction), axis=1)
        return (perpendicular <= tol) & (projected >= along.min() - tol) & (projected <= along.max() + tol)

    hull = ConvexHull(vertices)
    # each facet row is (normal, offset) with normal . p + offset <= 0 inside
    slack = points @ hull.equations[:, :-1].T + hull.equations[:, -1]
    return np.all(slack <= tol, axis=1)
