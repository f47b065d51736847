"""
Shape metrics of a binary image.

All white pixels form one shape regardless of connectivity. Coordinates are
pixel centers `(col, row)`.
"""
from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from shapemetrics.schemas.metrics import Circle, MetricVector
from shapemetrics.schemas.points import BinaryImage

logger = logging.getLogger(__name__)

# Second moment of a unit square about its center, per axis
PIXEL_MOMENT = 1.0 / 12.0

# Relative slack for "point lies inside circle" tests
_IN_CIRCLE_EPS = 1e-12

# Fixed shuffle seed: the enclosing circle must be bitwise reproducible
_MEC_SEED = 0x5EED


# --------------------------------------------------------------------------- #
#  Custom error types                                                         #
# --------------------------------------------------------------------------- #
class MetricsError(Exception):
    """A metric cannot be computed."""


class EmptyShapeError(MetricsError):
    """The image has no white pixel."""


def _require_shape(img: BinaryImage) -> None:
    if img.white_count == 0:
        raise EmptyShapeError("empty shape")


# --------------------------------------------------------------------------- #
#  Minimum enclosing circle                                                   #
# --------------------------------------------------------------------------- #
def _diameter(a: np.ndarray, b: np.ndarray) -> Tuple[float, float, float]:
    cx = (a[0] + b[0]) / 2
    cy = (a[1] + b[1]) / 2
    r = max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1]))
    return cx, cy, r


def _circumcircle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Optional[Tuple[float, float, float]]:
    # Translate to the bounding-box center for numerical stability
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(x - a[0], y - a[1]), math.hypot(x - b[0], y - b[1]), math.hypot(x - c[0], y - c[1]))
    return x, y, r


def _outside(pts: np.ndarray, circle: Tuple[float, float, float]) -> np.ndarray:
    cx, cy, r = circle
    return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) > r * (1 + _IN_CIRCLE_EPS) + _IN_CIRCLE_EPS


def _first_outside(pts: np.ndarray, circle: Tuple[float, float, float], start: int) -> Optional[int]:
    hits = np.flatnonzero(_outside(pts[start:], circle))
    return None if hits.size == 0 else start + int(hits[0])


def _cross(p: np.ndarray, q: np.ndarray, rx: float, ry: float) -> float:
    return (q[0] - p[0]) * (ry - p[1]) - (q[1] - p[1]) * (rx - p[0])


def _circle_with_two(pts: np.ndarray, p: np.ndarray, q: np.ndarray) -> Tuple[float, float, float]:
    """Smallest circle around `pts` with p and q on its boundary."""
    circ = _diameter(p, q)
    left = right = None
    for r in pts[_outside(pts, circ)]:
        cross = _cross(p, q, r[0], r[1])
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        if cross > 0.0 and (left is None or _cross(p, q, c[0], c[1]) > _cross(p, q, left[0], left[1])):
            left = c
        elif cross < 0.0 and (right is None or _cross(p, q, c[0], c[1]) < _cross(p, q, right[0], right[1])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_with_one(pts: np.ndarray, p: np.ndarray) -> Tuple[float, float, float]:
    """Smallest circle around `pts` with p on its boundary."""
    c = (float(p[0]), float(p[1]), 0.0)
    j = _first_outside(pts, c, 0)
    while j is not None:
        q = pts[j]
        if c[2] == 0.0:
            c = _diameter(p, q)
        else:
            c = _circle_with_two(pts[: j + 1], p, q)
        j = _first_outside(pts, c, j + 1)
    return c


def min_enclosing_circle(pixel_centers: Sequence[Sequence[float]]) -> Circle:
    """
    Smallest circle containing every point (randomized incremental algorithm,
    expected linear time). The shuffle is seeded, so results are reproducible.
    """
    pts = np.asarray(pixel_centers, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise MetricsError("cannot enclose an empty point set")
    pts = pts[np.random.default_rng(_MEC_SEED).permutation(pts.shape[0])]

    c = (float(pts[0, 0]), float(pts[0, 1]), 0.0)
    i = _first_outside(pts, c, 1)
    while i is not None:
        c = _circle_with_one(pts[: i + 1], pts[i])
        i = _first_outside(pts, c, i + 1)
    return Circle(cx=c[0], cy=c[1], radius=c[2])


def _boundary_coords(img: BinaryImage) -> np.ndarray:
    """
    Centers of white pixels with at least one black (or off-canvas) 4-neighbour.
    Every convex-hull vertex of the shape is among them, so they have the
    same enclosing circle as the whole shape.
    """
    padded = np.pad(img.pixels, 1, constant_values=False)
    interior = (
        padded[1:-1, 1:-1]
        & padded[:-2, 1:-1]
        & padded[2:, 1:-1]
        & padded[1:-1, :-2]
        & padded[1:-1, 2:]
    )
    rows, cols = np.nonzero(img.pixels & ~interior)
    return np.column_stack([cols, rows]).astype(float)


def shape_circle(img: BinaryImage) -> Circle:
    """Minimum enclosing circle of the white pixel centers."""
    _require_shape(img)
    return min_enclosing_circle(_boundary_coords(img))


# --------------------------------------------------------------------------- #
#  Shape metrics                                                              #
# --------------------------------------------------------------------------- #
def encircled_histogram(img: BinaryImage) -> Tuple[float, float]:
    """
    (white_ei, black_ei): white pixel count, and the rest of the square of side
    2r that encloses the shape's minimum enclosing circle (floored at 0).
    """
    _require_shape(img)
    white = float(img.white_count)
    r = shape_circle(img).radius
    black = max(0.0, (2.0 * r) ** 2 - white)
    return white, black


def shape_proportion(white_ei: float, black_ei: float) -> float:
    """Area fraction of the shape within its encircling square."""
    if white_ei <= 0:
        raise MetricsError("white_ei must be positive")
    return white_ei / (white_ei + black_ei)


def covariance_eigenvalues(img: BinaryImage) -> Tuple[float, float]:
    """
    Descending eigenvalues of the population covariance of white pixel centers
    plus (1/12)·I, so eig2 >= 1/12 even for collinear shapes.
    """
    _require_shape(img)
    coords = img.white_coords()
    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered / coords.shape[0] + PIXEL_MOMENT * np.eye(2)
    eig2, eig1 = np.linalg.eigvalsh(cov)  # ascending
    return float(eig1), float(eig2)


def eccentricity(eig1: float, eig2: float, form: str = "ratio") -> float:
    """eig1 / eig2 ("ratio") or its square root, the axis-length ratio ("sqrt")."""
    if eig2 <= 0:
        raise MetricsError("second eigenvalue must be positive")
    if eig1 < eig2:
        raise MetricsError("eigenvalues must be given in descending order")
    ratio = eig1 / eig2
    if form == "ratio":
        return ratio
    if form == "sqrt":
        return math.sqrt(ratio)
    raise MetricsError(f"unknown eccentricity form '{form}'")


def perimeter(img: BinaryImage) -> float:
    """Crack length: unit edges between a white pixel and a black pixel or the image border."""
    _require_shape(img)
    padded = np.pad(img.pixels, 1, constant_values=False).astype(np.int8)
    vertical = np.count_nonzero(np.diff(padded, axis=0))
    horizontal = np.count_nonzero(np.diff(padded, axis=1))
    return float(vertical + horizontal)


def circularity(img: BinaryImage, form: str = "perimeter_ratio") -> float:
    """
    P² / (4πA) ("perimeter_ratio", 1 for a continuum disk, larger otherwise)
    or its reciprocal 4πA / P² ("isoperimetric").
    """
    p = perimeter(img)
    a = float(img.white_count)
    if form == "perimeter_ratio":
        return p * p / (4.0 * math.pi * a)
    if form == "isoperimetric":
        return 4.0 * math.pi * a / (p * p)
    raise MetricsError(f"unknown circularity form '{form}'")


def metric_vector(img: BinaryImage, settings=None) -> MetricVector:
    """All seven metrics in METRIC_NAMES order. `settings` selects the eccentricity/circularity forms."""
    ecc_form = getattr(settings, "ECCENTRICITY_FORM", "ratio")
    circ_form = getattr(settings, "CIRCULARITY_FORM", "perimeter_ratio")

    white, black = encircled_histogram(img)
    eig1, eig2 = covariance_eigenvalues(img)
    return MetricVector(
        white_ei=white,
        black_ei=black,
        sp=shape_proportion(white, black),
        eccentricity=eccentricity(eig1, eig2, ecc_form),
        eig1=eig1,
        eig2=eig2,
        circularity=circularity(img, circ_form),
    )
