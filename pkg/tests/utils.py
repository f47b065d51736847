# tests/utils.py
"""
Test helpers: small image builders and brute-force oracles the fast
implementations are checked against.
"""
import itertools
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from shapemetrics.schemas.points import BinaryImage


# --- Image builders ---

def image_from_pixels(rows) -> BinaryImage:
    """BinaryImage from a nested list / array; `rows[0]` is the smallest-y row."""
    pixels = np.array(rows, dtype=bool)
    return BinaryImage(
        pixels=pixels,
        range_x=(0.0, float(pixels.shape[1])),
        range_y=(0.0, float(pixels.shape[0])),
    )


def render_disk(radius: int, margin: int = 2) -> BinaryImage:
    """Pixels whose center lies within `radius` of the canvas center."""
    size = 2 * (radius + margin) + 1
    c = size // 2
    rows, cols = np.mgrid[0:size, 0:size]
    return image_from_pixels((rows - c) ** 2 + (cols - c) ** 2 <= radius ** 2)


# --- Oracles ---

def brute_force_circle(points: np.ndarray) -> Tuple[float, float, float]:
    """
    Minimum enclosing circle by checking every pair (as diameter) and every
    non-collinear triple (as circumcircle). O(n^4); keep inputs tiny.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] == 1:
        return float(pts[0, 0]), float(pts[0, 1]), 0.0

    def encloses(cx, cy, r):
        return bool(np.all(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= r + 1e-9))

    best: Optional[Tuple[float, float, float]] = None
    for a, b in itertools.combinations(pts, 2):
        cx, cy = (a + b) / 2
        r = math.hypot(*(a - b)) / 2
        if encloses(cx, cy, r) and (best is None or r < best[2]):
            best = (cx, cy, r)
    for a, b, c in itertools.combinations(pts, 3):
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-12:
            continue
        sa, sb, sc = a @ a, b @ b, c @ c
        cx = (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d
        cy = (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d
        r = math.hypot(a[0] - cx, a[1] - cy)
        if encloses(cx, cy, r) and (best is None or r < best[2]):
            best = (cx, cy, r)
    return best


def edge_count_perimeter(pixels: np.ndarray) -> int:
    """Perimeter by visiting every white pixel and counting its non-white 4-neighbours."""
    pixels = np.asarray(pixels, dtype=bool)
    h, w = pixels.shape
    total = 0
    for r in range(h):
        for c in range(w):
            if not pixels[r, c]:
                continue
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if not (0 <= rr < h and 0 <= cc < w) or not pixels[rr, cc]:
                    total += 1
    return total


def floor_binning(points: np.ndarray, bins_x: int, bins_y: int, range_x, range_y) -> np.ndarray:
    """Occupancy grid [row, col] by explicit floor((v - min) / width), clamping the max edge into the last bin."""
    grid = np.zeros((bins_y, bins_x), dtype=bool)
    wx = (range_x[1] - range_x[0]) / bins_x
    wy = (range_y[1] - range_y[0]) / bins_y
    for x, y in points:
        if not (range_x[0] <= x <= range_x[1] and range_y[0] <= y <= range_y[1]):
            continue
        col = min(int(math.floor((x - range_x[0]) / wx)), bins_x - 1)
        row = min(int(math.floor((y - range_y[0]) / wy)), bins_y - 1)
        grid[row, col] = True
    return grid


def gini_gain(y: np.ndarray, go_left: np.ndarray, n_classes: int) -> float:
    """n·Gini(parent) - Σ n_child·Gini(child), straight from the definition."""
    def weighted(labels):
        n = labels.shape[0]
        if n == 0:
            return 0.0
        p = np.bincount(labels, minlength=n_classes) / n
        return n * (1.0 - float(np.sum(p ** 2)))

    return weighted(y) - weighted(y[go_left]) - weighted(y[~go_left])


def brute_force_best_split(
    X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int = 1
) -> Optional[Tuple[int, float, float]]:
    """
    (feature, threshold, gain) over every feature and every midpoint between
    distinct sorted values, one candidate at a time. Ties go to the lowest
    feature, then the lowest threshold.
    """
    def weighted(labels):
        counts = np.bincount(labels, minlength=n_classes).astype(float)
        n = counts.sum()
        return n - (counts ** 2).sum() / n

    parent = weighted(y)
    best, best_gain = None, 1e-12
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = (lo + hi) / 2.0
            if threshold <= lo:
                threshold = hi
            go_left = X[:, f] < threshold
            if go_left.sum() < min_leaf or (~go_left).sum() < min_leaf:
                continue
            gain = parent - (weighted(y[go_left]) + weighted(y[~go_left]))
            if gain > best_gain:
                best, best_gain = (f, float(threshold), float(gain)), gain
    return best


def feature_rows(rng: np.random.Generator, per_class: Sequence[int], shift: float = 3.0) -> Tuple[np.ndarray, np.ndarray]:
    """Seven-column Gaussian rows; class c is shifted by c·shift along feature 2."""
    X, y = [], []
    for c, n in enumerate(per_class):
        block = rng.normal(size=(n, 7))
        block[:, 2] += c * shift
        X.append(block)
        y.extend([c] * n)
    return np.vstack(X), np.array(y)
