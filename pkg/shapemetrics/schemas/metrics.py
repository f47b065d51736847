# shapemetrics/schemas/metrics.py
import math
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Column order used everywhere: CSV header, feature indices, usage counts
METRIC_NAMES: Tuple[str, ...] = (
    "white_ei",
    "black_ei",
    "sp",
    "eccentricity",
    "eig1",
    "eig2",
    "circularity",
)

METRIC_LABELS: Dict[str, str] = {
    "white_ei": "White EI",
    "black_ei": "Black EI",
    "sp": "SP value",
    "eccentricity": "Eccentricity",
    "eig1": "1st Eigenvalue",
    "eig2": "2nd Eigenvalue",
    "circularity": "Circularity",
}


class Circle(BaseModel):
    """Circle in pixel coordinates."""
    cx: float
    cy: float
    radius: float = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    def contains(self, x: float, y: float, tol: float = 1e-9) -> bool:
        return math.hypot(x - self.cx, y - self.cy) <= self.radius + tol


class MetricVector(BaseModel):
    """The seven shape metrics of one image, in METRIC_NAMES order."""
    white_ei: float = Field(..., ge=0)
    black_ei: float = Field(..., ge=0)
    sp: float = Field(..., gt=0, le=1)
    eccentricity: float = Field(..., ge=1)
    eig1: float = Field(..., gt=0)
    eig2: float = Field(..., gt=0)
    circularity: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_consistency(self) -> "MetricVector":
        if abs(self.sp - self.white_ei / (self.white_ei + self.black_ei)) > 1e-9:
            raise ValueError("sp must equal white_ei / (white_ei + black_ei)")
        if self.eig1 < self.eig2:
            raise ValueError("eigenvalues must be in descending order")
        return self

    def as_tuple(self) -> Tuple[float, ...]:
        return tuple(getattr(self, name) for name in METRIC_NAMES)

    def to_record(self, label: Optional[str] = None) -> Dict[str, object]:
        """Flat dict with the CSV/JSON keys (label last)."""
        record: Dict[str, object] = {name: getattr(self, name) for name in METRIC_NAMES}
        record["label"] = label
        return record
