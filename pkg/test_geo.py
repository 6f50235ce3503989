#!/usr/bin/env python3
"""
Tests for great-circle distance, the Miller projection and field placement.
"""

import math

import numpy as np
import pytest

from src.analysis.geo import (
    EARTH_RADIUS_KM,
    EARTH_RADIUS_M,
    GeoPoint,
    fit_to_field,
    haversine_distance,
    haversine_km,
    miller_project,
    miller_project_arrays,
    pairwise_haversine_km,
)
from src.utils.errors import DataError

BOSTON_UNIVERSITY = GeoPoint(42.3505, -71.1054)
CENTRAL_PARK_WEST = GeoPoint(40.7711, -73.9803)


def cosine_law_km(a: GeoPoint, b: GeoPoint) -> float:
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    d_lambda = math.radians(b.lng - a.lng)
    cos_angle = math.sin(phi1) * math.sin(phi2) + math.cos(phi1) * math.cos(phi2) * math.cos(d_lambda)
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, cos_angle)))


def test_geopoint_rejects_out_of_range():
    for lat, lng in ((90.5, 0.0), (-91.0, 0.0), (0.0, 180.5), (float("nan"), 0.0), (0.0, float("inf"))):
        with pytest.raises(DataError):
            GeoPoint(lat, lng)


def test_haversine_matches_cosine_law_on_random_pairs():
    rng = np.random.default_rng(1)
    half_circumference = math.pi * EARTH_RADIUS_KM
    checked = 0
    for _ in range(1000):
        a = GeoPoint(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 180)))
        b = GeoPoint(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 180)))
        distance = haversine_distance(a, b)
        oracle = cosine_law_km(a, b)
        assert 0.0 <= distance <= half_circumference + 1e-9
        if 10.0 < oracle < half_circumference - 100.0:
            assert abs(distance - oracle) / oracle < 1e-6
            checked += 1
    assert checked > 900


def test_haversine_known_pair_and_symmetry():
    d = haversine_distance(BOSTON_UNIVERSITY, CENTRAL_PARK_WEST)
    assert d == pytest.approx(cosine_law_km(BOSTON_UNIVERSITY, CENTRAL_PARK_WEST), rel=1e-9)
    assert 290.0 < d < 305.0
    assert haversine_distance(CENTRAL_PARK_WEST, BOSTON_UNIVERSITY) == pytest.approx(d, rel=1e-12)
    assert haversine_distance(BOSTON_UNIVERSITY, BOSTON_UNIVERSITY) == 0.0


def test_haversine_reported_venues_match_cosine_law():
    austin_airport = GeoPoint(30.20155, -97.66712)
    apple_hq = GeoPoint(37.33188, -122.02963)
    assert haversine_distance(austin_airport, apple_hq) == pytest.approx(
        cosine_law_km(austin_airport, apple_hq), rel=1e-9)


def test_haversine_triangle_inequality():
    rng = np.random.default_rng(7)
    for _ in range(500):
        a, b, c = (GeoPoint(float(rng.uniform(-89, 89)), float(rng.uniform(-180, 180))) for _ in range(3))
        ab = haversine_distance(a, b)
        bc = haversine_distance(b, c)
        ac = haversine_distance(a, c)
        assert ac <= ab + bc + 1e-9 * EARTH_RADIUS_KM


def test_antipodal_points_are_half_circumference():
    d = haversine_distance(GeoPoint(0.0, 0.0), GeoPoint(0.0, 180.0))
    assert d == pytest.approx(math.pi * EARTH_RADIUS_KM, rel=1e-12)


def test_vectorized_and_pairwise_agree_with_scalar():
    lats = np.array([BOSTON_UNIVERSITY.lat, CENTRAL_PARK_WEST.lat, 0.0])
    lngs = np.array([BOSTON_UNIVERSITY.lng, CENTRAL_PARK_WEST.lng, 10.0])
    matrix = pairwise_haversine_km(lats, lngs)
    assert np.allclose(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0.0)
    assert matrix[0, 1] == pytest.approx(haversine_distance(BOSTON_UNIVERSITY, CENTRAL_PARK_WEST), rel=1e-12)
    single = haversine_km(lats[0], lngs[0], lats[2], lngs[2])
    assert float(single) == pytest.approx(matrix[0, 2], rel=1e-12)


def test_miller_projection():
    assert miller_project(GeoPoint(0.0, 0.0)) == (0.0, 0.0)
    x, y = miller_project(GeoPoint(45.0, 90.0))
    assert x == pytest.approx(math.pi / 2)
    assert y == pytest.approx(1.25 * math.log(math.tan(math.pi / 4 + 0.4 * math.radians(45.0))))
    with pytest.raises(DataError):
        miller_project(GeoPoint(90.0, 0.0))


def test_miller_is_odd_in_latitude_and_monotone():
    _, north = miller_project(GeoPoint(30.20155, -97.66712))
    _, south = miller_project(GeoPoint(-30.20155, -97.66712))
    assert north == -south
    xs_arr, ys_arr = miller_project_arrays([30.20155, -30.20155, 0.0], [-97.66712, -97.66712, 0.0])
    assert ys_arr[0] == pytest.approx(north, rel=1e-12)
    assert ys_arr[0] == -ys_arr[1]
    assert ys_arr[2] == 0.0
    assert xs_arr[2] == 0.0

    ys = [miller_project(GeoPoint(lat, 0.0))[1] for lat in np.linspace(-89.0, 89.0, 50)]
    xs = [miller_project(GeoPoint(0.0, lng))[0] for lng in np.linspace(-179.0, 179.0, 50)]
    assert all(np.diff(ys) > 0)
    assert all(np.diff(xs) > 0)


def test_fit_to_field_letterboxes_inside_field():
    points = [BOSTON_UNIVERSITY, CENTRAL_PARK_WEST, GeoPoint(41.5, -72.0)]
    placed, transform = fit_to_field(points, 2000.0, 1000.0)
    xs = [p.x for p in placed]
    ys = [p.y for p in placed]
    assert all(0.0 <= x <= 2000.0 for x in xs)
    assert all(0.0 <= y <= 1000.0 for y in ys)
    # the limiting axis spans the full field
    assert max(xs) - min(xs) == pytest.approx(2000.0) or max(ys) - min(ys) == pytest.approx(1000.0)
    again = transform.apply(points[2])
    assert (again.x, again.y) == pytest.approx((placed[2].x, placed[2].y))


def test_fit_to_field_preserves_distance_ratios():
    rng = np.random.default_rng(3)
    points = [GeoPoint(float(rng.uniform(42.0, 42.5)), float(rng.uniform(-71.5, -71.0))) for _ in range(30)]
    placed, _ = fit_to_field(points, 2000.0, 2000.0)
    raw = [miller_project(p) for p in points]
    for _ in range(100):
        a, b, c = rng.choice(len(points), size=3, replace=False)
        field_ratio = (math.dist((placed[a].x, placed[a].y), (placed[b].x, placed[b].y))
                       / math.dist((placed[a].x, placed[a].y), (placed[c].x, placed[c].y)))
        raw_ratio = math.dist(raw[a], raw[b]) / math.dist(raw[a], raw[c])
        assert field_ratio == pytest.approx(raw_ratio, rel=1e-9)


def test_fit_to_field_single_point_is_centred():
    placed, _ = fit_to_field([BOSTON_UNIVERSITY], 2000.0, 2000.0)
    assert (placed[0].x, placed[0].y) == (1000.0, 1000.0)


def test_fit_to_field_preserve_scale_keeps_metres_on_equator():
    step = math.degrees(800.0 / EARTH_RADIUS_M)
    placed, _ = fit_to_field([GeoPoint(0.0, 0.0), GeoPoint(0.0, step)], 2000.0, 2000.0, preserve_scale=True)
    assert placed[1].x - placed[0].x == pytest.approx(800.0, rel=1e-9)
    assert placed[0].x == pytest.approx(600.0)
    with pytest.raises(DataError):
        fit_to_field([GeoPoint(0.0, 0.0), GeoPoint(0.0, 1.0)], 2000.0, 2000.0, preserve_scale=True)


def test_fit_to_field_rejects_empty_input():
    with pytest.raises(DataError):
        fit_to_field([], 100.0, 100.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
