# shapemetrics/schemas/experiment.py
import math
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from shapemetrics.schemas.points import GridSpec
from shapemetrics.schemas.scenario import ScenarioSpec
from shapemetrics.schemas.tree import CvParams, TreeModel


# --------------------------------------------------------------------------- #
#                               Requests                                      #
# --------------------------------------------------------------------------- #

class ExperimentSpec(BaseModel):
    """One classification experiment: one ScenarioSpec per class."""
    name: str = Field(..., min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    classes: List[ScenarioSpec]
    images_per_class: int = Field(100, ge=2)
    train_fraction: float = Field(0.8, gt=0, lt=1)
    grid: GridSpec = Field(default_factory=GridSpec)
    master_seed: int = Field(0, ge=0, lt=2**64)
    reference_accuracy: Optional[float] = Field(
        None, ge=0, le=1, description="Reference accuracy for this design, reported alongside ours"
    )

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_design(self) -> "ExperimentSpec":
        if len(self.classes) < 2:
            raise ValueError("an experiment needs at least two classes")
        n_train = train_count(self.images_per_class, self.train_fraction)
        if not 1 <= n_train < self.images_per_class:
            raise ValueError("train_fraction leaves no rows for training or validation")
        return self

    @property
    def class_names(self) -> List[str]:
        return [c.variant for c in self.classes]


class SuiteConfig(BaseModel):
    """What `run_suite` runs: the default experiments (optionally a subset) under one master seed."""
    master_seed: int = Field(0, ge=0, lt=2**64)
    grid: GridSpec = Field(default_factory=GridSpec)
    images_per_class: int = Field(100, ge=2)
    train_fraction: float = Field(0.8, gt=0, lt=1)
    n_points: int = Field(1000, ge=1, description="Points simulated per image")
    experiments: Optional[List[str]] = Field(None, description="Names to run; None runs all")
    tree_params: CvParams = Field(default_factory=CvParams)

    model_config = ConfigDict(frozen=True)


def train_count(n: int, fraction: float) -> int:
    """Rows of a class that go to training: floor(fraction·n), robust to products like 0.57·100 = 56.99999999999999."""
    return int(math.floor(fraction * n + 1e-9))


# --------------------------------------------------------------------------- #
#                               Responses                                     #
# --------------------------------------------------------------------------- #

class ExperimentResult(BaseModel):
    name: str
    class_names: List[str]
    accuracy: float = Field(..., ge=0, le=1)
    ci_low: float = Field(..., ge=0, le=1)
    ci_high: float = Field(..., ge=0, le=1)
    confusion: List[List[int]] = Field(..., description="rows = true class, columns = predicted class")
    n_validation: int = Field(..., ge=1)
    cp: float = Field(..., ge=0, description="Complexity parameter picked by cross-validation")
    cv_accuracy: float = Field(..., ge=0, le=1)
    tree: TreeModel
    reference_accuracy: Optional[float] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_confusion(self) -> "ExperimentResult":
        total = sum(sum(row) for row in self.confusion)
        if total != self.n_validation:
            raise ValueError("confusion entries must sum to n_validation")
        correct = sum(self.confusion[i][i] for i in range(len(self.confusion)))
        if abs(self.accuracy - correct / self.n_validation) > 1e-12:
            raise ValueError("accuracy must equal trace(confusion) / n_validation")
        if not self.ci_low <= self.accuracy <= self.ci_high:
            raise ValueError("confidence interval must contain the accuracy")
        return self


class ExperimentFailure(BaseModel):
    experiment: str
    stage: str
    message: str


class SuiteReport(BaseModel):
    master_seed: int
    grid: GridSpec
    tree_params: CvParams = Field(..., description="Growth limits and cp grid used for every experiment")
    results: List[ExperimentResult] = Field(default_factory=list)
    usage: Dict[str, int] = Field(default_factory=dict, description="Split counts per metric, in metric order")
    failures: List[ExperimentFailure] = Field(default_factory=list)
    partial: bool = False

    model_config = ConfigDict(frozen=True)
