# File: src/analysis/geo.py

"""
Geographic primitives: validated positions, great-circle distance and the
Miller projection used to place checkins inside a rectangular simulation field.

All public functions take degrees; radians are used internally only.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

import src.config as config
from src.utils.errors import DataError

EARTH_RADIUS_KM = config.EARTH_RADIUS_KM
EARTH_RADIUS_M = EARTH_RADIUS_KM * 1000.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lng: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lng)):
            raise DataError(f"Non-finite coordinate ({self.lat}, {self.lng})")
        if not -90.0 <= self.lat <= 90.0:
            raise DataError(f"Latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lng <= 180.0:
            raise DataError(f"Longitude {self.lng} outside [-180, 180]")


@dataclass(frozen=True)
class FieldPoint:
    x: float
    y: float


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in kilometres, asin form with the argument clamped to [0, 1]."""
    lat_a, lat_b = math.radians(a.lat), math.radians(b.lat)
    d_lat = lat_b - lat_a
    d_lng = math.radians(b.lng - a.lng)
    phi = math.sin(d_lat / 2) ** 2 + math.cos(lat_a) * math.cos(lat_b) * math.sin(d_lng / 2) ** 2
    phi = min(1.0, max(0.0, phi))
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(phi))


def haversine_km(lats1, lngs1, lats2, lngs2) -> np.ndarray:
    """
    Vectorized haversine in kilometres over broadcastable arrays of degrees.
    """
    lats1, lngs1, lats2, lngs2 = map(np.radians, map(np.asarray, (lats1, lngs1, lats2, lngs2)))
    phi = (np.sin((lats2 - lats1) / 2) ** 2
           + np.cos(lats1) * np.cos(lats2) * np.sin((lngs2 - lngs1) / 2) ** 2)
    phi = np.clip(phi, 0.0, 1.0)
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(phi))


def pairwise_haversine_km(lats, lngs) -> np.ndarray:
    """Symmetric k x k distance matrix (km) with an exact zero diagonal."""
    lats = np.asarray(lats, dtype=float)
    lngs = np.asarray(lngs, dtype=float)
    matrix = haversine_km(lats[:, None], lngs[:, None], lats[None, :], lngs[None, :])
    matrix = (matrix + matrix.T) / 2
    np.fill_diagonal(matrix, 0.0)
    return matrix


def _check_projectable(lat: float) -> None:
    if abs(lat) >= 90.0:
        raise DataError(f"Latitude {lat} is at a pole; Miller projection needs |lat| < 90")


def miller_project(p: GeoPoint) -> Tuple[float, float]:
    """
    Miller cylindrical projection on the unit sphere: (lambda, 5/4 ln tan(pi/4 + 2 phi / 5)).

    The y term is evaluated as 5/4 asinh(tan(4 phi / 5)), the same function,
    which is exactly odd in latitude and exactly 0 on the equator.
    """
    _check_projectable(p.lat)
    lam = math.radians(p.lng)
    phi = math.radians(p.lat)
    return lam, 1.25 * math.asinh(math.tan(0.8 * phi))


def miller_project_arrays(lats, lngs) -> Tuple[np.ndarray, np.ndarray]:
    lats = np.asarray(lats, dtype=float)
    lngs = np.asarray(lngs, dtype=float)
    if lats.size and np.any(np.abs(lats) >= 90.0):
        raise DataError("Latitude at a pole; Miller projection needs |lat| < 90")
    x_raw = np.radians(lngs)
    y_raw = 1.25 * np.arcsinh(np.tan(0.8 * np.radians(lats)))
    return x_raw, y_raw


@dataclass(frozen=True)
class FieldTransform:
    """
    Uniform scale + translation from Miller plane coordinates to field metres.

    field = (raw - raw_center) * scale + field_center
    """
    scale: float
    raw_center_x: float
    raw_center_y: float
    width: float
    height: float

    def apply_arrays(self, lats, lngs) -> np.ndarray:
        x_raw, y_raw = miller_project_arrays(lats, lngs)
        x = (x_raw - self.raw_center_x) * self.scale + self.width / 2
        y = (y_raw - self.raw_center_y) * self.scale + self.height / 2
        # rounding at the box edges must not leak outside the field
        return np.column_stack([np.clip(x, 0.0, self.width), np.clip(y, 0.0, self.height)])

    def apply(self, p: GeoPoint) -> FieldPoint:
        x, y = self.apply_arrays([p.lat], [p.lng])[0]
        return FieldPoint(float(x), float(y))

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "raw_center_x": self.raw_center_x,
            "raw_center_y": self.raw_center_y,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FieldTransform":
        return cls(**{key: float(data[key]) for key in
                      ("scale", "raw_center_x", "raw_center_y", "width", "height")})


def fit_transform(lats, lngs, width: float, height: float,
                  preserve_scale: bool = False) -> FieldTransform:
    """
    Transform that letterboxes the projected bounding box into the field.

    With preserve_scale the projected radians are scaled by the Earth radius
    (true metres at the equator) and only centred.
    """
    if width <= 0 or height <= 0:
        raise DataError(f"Field dimensions must be positive, got {width} x {height}")
    lats = np.asarray(lats, dtype=float)
    lngs = np.asarray(lngs, dtype=float)
    if lats.size == 0:
        raise DataError("Cannot fit an empty point set to the field")
    x_raw, y_raw = miller_project_arrays(lats, lngs)
    span_x = float(x_raw.max() - x_raw.min())
    span_y = float(y_raw.max() - y_raw.min())
    center_x = float(x_raw.min() + span_x / 2)
    center_y = float(y_raw.min() + span_y / 2)

    if preserve_scale:
        scale = EARTH_RADIUS_M
        if span_x * scale > width or span_y * scale > height:
            raise DataError(
                f"Points span {span_x * scale:.1f} x {span_y * scale:.1f} m and do not fit "
                f"a {width} x {height} m field at true scale"
            )
    elif span_x == 0 and span_y == 0:
        scale = 1.0
    elif span_x == 0:
        scale = height / span_y
    elif span_y == 0:
        scale = width / span_x
    else:
        scale = min(width / span_x, height / span_y)
    return FieldTransform(scale, center_x, center_y, float(width), float(height))


def fit_to_field(points: Sequence[GeoPoint], width: float, height: float,
                 preserve_scale: bool = False) -> Tuple[List[FieldPoint], FieldTransform]:
    if len(points) == 0:
        raise DataError("Cannot fit an empty point set to the field")
    lats = [p.lat for p in points]
    lngs = [p.lng for p in points]
    transform = fit_transform(lats, lngs, width, height, preserve_scale)
    coords = transform.apply_arrays(lats, lngs)
    return [FieldPoint(float(x), float(y)) for x, y in coords], transform
