# shapemetrics/schemas/points.py
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Range = Tuple[float, float]


# --------------------------------------------------------------------------- #
#                              Base / mix-in                                  #
# --------------------------------------------------------------------------- #

class _ArrayModelMixin:
    """Common config for models that carry numpy arrays."""
    model_config = ConfigDict(
        arbitrary_types_allowed=True,  # np.ndarray fields
        frozen=True,
    )


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------- #
#                               Point data                                    #
# --------------------------------------------------------------------------- #

class PointSet(_ArrayModelMixin, BaseModel):
    """
    Ordered (x, y) pairs, stored as an (n, 2) float array.

    Emptiness and finiteness are *not* enforced here: the rasterizer checks
    them so it can report "empty input" / "non-finite input".
    """
    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _coerce(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("points must be a sequence of (x, y) pairs")
        return _readonly(arr)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def shifted(self, dx: float, dy: float) -> "PointSet":
        return PointSet(points=self.points + np.array([dx, dy]))

    def scaled(self, c: float) -> "PointSet":
        return PointSet(points=self.points * c)


class GridSpec(BaseModel):
    """Histogram resolution plus an optional fixed binning window ("shared canvas")."""
    bins_x: int = Field(100, ge=1)
    bins_y: int = Field(100, ge=1)
    range_x: Optional[Range] = Field(None, description="Fixed x window; None → data [min, max]")
    range_y: Optional[Range] = Field(None, description="Fixed y window; None → data [min, max]")

    model_config = ConfigDict(frozen=True)

    @field_validator("range_x", "range_y")
    @classmethod
    def _check_range(cls, v: Optional[Range]) -> Optional[Range]:
        if v is not None and not (np.isfinite(v[0]) and np.isfinite(v[1]) and v[0] < v[1]):
            raise ValueError("range must be finite with min < max")
        return v


# --------------------------------------------------------------------------- #
#                               Images                                        #
# --------------------------------------------------------------------------- #

class BinaryImage(_ArrayModelMixin, BaseModel):
    """
    Occupancy grid. `pixels[row, col]` where col comes from the x-bins and
    row from the y-bins; row 0 holds the smallest y.
    """
    pixels: np.ndarray
    range_x: Range
    range_y: Range

    @field_validator("pixels", mode="before")
    @classmethod
    def _coerce_pixels(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=bool)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ValueError("pixels must be a non-empty 2D grid")
        return _readonly(arr)

    @model_validator(mode="after")
    def _check_ranges(self) -> "BinaryImage":
        if not (self.range_x[0] < self.range_x[1] and self.range_y[0] < self.range_y[1]):
            raise ValueError("image ranges must satisfy min < max")
        return self

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def white_count(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def white_coords(self) -> np.ndarray:
        """(col, row) pixel-center coordinates of every white pixel, as floats."""
        rows, cols = np.nonzero(self.pixels)
        return np.column_stack([cols, rows]).astype(float)

    def padded(self, border: int) -> "BinaryImage":
        """Same shape on a larger black canvas (ranges are kept as-is)."""
        return BinaryImage(
            pixels=np.pad(self.pixels, border, constant_values=False),
            range_x=self.range_x,
            range_y=self.range_y,
        )
