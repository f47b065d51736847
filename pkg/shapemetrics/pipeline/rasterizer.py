"""
Point data → binary image: a 2D histogram followed by a ">0" threshold.

Every public function:
• is a pure function of its inputs (safe to call from many threads)
• returns schema objects from `shapemetrics.schemas.points`
• raises `RasterizeError` (or a subclass) on bad input
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from shapemetrics.schemas.points import BinaryImage, GridSpec, PointSet, Range

logger = logging.getLogger(__name__)

# Half-width used to widen an axis whose points all share one value
DEGENERATE_PAD = 0.5


# --------------------------------------------------------------------------- #
#  Custom error types                                                         #
# --------------------------------------------------------------------------- #
class RasterizeError(Exception):
    """Point data cannot be turned into an image."""


class EmptyInputError(RasterizeError):
    """No points (or no points inside a fixed binning window)."""


class NonFiniteInputError(RasterizeError):
    """A coordinate is NaN or infinite."""


# --------------------------------------------------------------------------- #
#  Internal helpers                                                           #
# --------------------------------------------------------------------------- #
def _axis_range(values: np.ndarray, fixed: Optional[Range]) -> Range:
    """Binning window for one axis: the fixed window if given, else data [min, max] (padded when degenerate)."""
    if fixed is not None:
        return float(fixed[0]), float(fixed[1])
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return lo - DEGENERATE_PAD, hi + DEGENERATE_PAD
    return lo, hi


def _check_points(points: PointSet) -> None:
    if len(points) == 0:
        raise EmptyInputError("empty input")
    if not np.isfinite(points.points).all():
        raise NonFiniteInputError("non-finite input")


# --------------------------------------------------------------------------- #
#  Core operations                                                            #
# --------------------------------------------------------------------------- #
def histogram(points: PointSet, grid: GridSpec) -> Tuple[np.ndarray, Range, Range]:
    """
    Count grid indexed `[row, col]` (row from y-bins, col from x-bins) and the
    two ranges used. Interior edges belong to the right bin; the global max
    edge belongs to the last bin (numpy.histogram2d semantics). With a fixed
    window, points outside it are dropped.
    """
    _check_points(points)
    range_x = _axis_range(points.x, grid.range_x)
    range_y = _axis_range(points.y, grid.range_y)
    counts, _, _ = np.histogram2d(
        points.x,
        points.y,
        bins=(grid.bins_x, grid.bins_y),
        range=(range_x, range_y),
    )
    return counts.T, range_x, range_y


def occupancy_to_image(counts: np.ndarray, range_x: Range, range_y: Range) -> BinaryImage:
    """Apply the >0 threshold to a count grid. Idempotent on 0/1 grids."""
    counts = np.asarray(counts)
    if not (counts > 0).any():
        raise EmptyInputError("no points inside binning range")
    return BinaryImage(pixels=counts > 0, range_x=range_x, range_y=range_y)


def rasterize(points: PointSet, grid: GridSpec) -> BinaryImage:
    """Turn a PointSet into a BinaryImage: pixel is white iff at least one point fell in its bin."""
    counts, range_x, range_y = histogram(points, grid)
    img = occupancy_to_image(counts, range_x, range_y)
    logger.debug(
        "Rasterized %d points onto %dx%d grid: %d white pixels",
        len(points), grid.bins_x, grid.bins_y, img.white_count,
    )
    return img
