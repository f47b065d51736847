# shapemetrics/schemas/scenario.py
from typing import Dict, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Family = Literal["normal_pair", "mixture", "qq", "function", "residual"]

# Valid variant tags per family
VARIANTS: Dict[str, Tuple[str, ...]] = {
    "normal_pair": ("standard", "shifted", "correlated", "tight"),
    "mixture": ("1", "2", "3", "4"),
    "qq": ("none", "minor", "medium", "major"),
    "function": ("linear", "sine", "parabola", "poly"),
    "residual": ("random", "cone", "binom", "multi"),
}


class GaussianSpec(BaseModel):
    """Bivariate normal N(mean, cov)."""
    mean: Tuple[float, float] = (0.0, 0.0)
    cov: Tuple[Tuple[float, float], Tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0))

    model_config = ConfigDict(frozen=True)

    @field_validator("cov")
    @classmethod
    def _check_symmetric(cls, v):
        if v[0][1] != v[1][0]:
            raise ValueError("covariance must be symmetric")
        return v

    @property
    def cov_matrix(self) -> np.ndarray:
        return np.array(self.cov, dtype=float)


class ScenarioSpec(BaseModel):
    """One simulated scenario: which generator, which variant, how many points, which seed."""
    family: Family
    variant: str
    n_points: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_variant(self) -> "ScenarioSpec":
        if self.variant not in VARIANTS[self.family]:
            raise ValueError(
                f"variant '{self.variant}' is not valid for family '{self.family}' "
                f"(expected one of {', '.join(VARIANTS[self.family])})"
            )
        return self

    @property
    def label(self) -> str:
        return f"{self.family}:{self.variant}"
