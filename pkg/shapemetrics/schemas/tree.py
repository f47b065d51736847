# shapemetrics/schemas/tree.py
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from shapemetrics.schemas.metrics import METRIC_NAMES


# --------------------------------------------------------------------------- #
#                               Training data                                 #
# --------------------------------------------------------------------------- #

class LabeledDataset(BaseModel):
    """Feature rows (one MetricVector each) with integer class labels 0..C-1."""
    features: np.ndarray
    labels: np.ndarray
    class_names: List[str]
    feature_names: Tuple[str, ...] = METRIC_NAMES

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("features", mode="before")
    @classmethod
    def _coerce_features(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.size == 0:
            arr = arr.reshape(0, len(METRIC_NAMES))
        if arr.ndim != 2:
            raise ValueError("features must be a 2D array")
        arr.setflags(write=False)
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def _coerce_labels(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.int64).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shapes(self) -> "LabeledDataset":
        if len(self.class_names) < 2:
            raise ValueError("a dataset needs at least two classes")
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError(
                f"rows must have exactly {len(self.feature_names)} features, got {self.features.shape[1]}"
            )
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels must have the same number of rows")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError("every label must be a class index below the number of classes")
        return self

    @property
    def n_rows(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, idx: Sequence[int]) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(
            features=self.features[idx],
            labels=self.labels[idx],
            class_names=self.class_names,
            feature_names=self.feature_names,
        )


# --------------------------------------------------------------------------- #
#                               Tree                                          #
# --------------------------------------------------------------------------- #

class TreeNode(BaseModel):
    """
    A leaf when `feature` is None; otherwise an internal split where rows with
    `x[feature] < threshold` go left.
    """
    prediction: int = Field(..., ge=0)
    counts: List[int]
    feature: Optional[int] = Field(None, ge=0)
    feature_name: Optional[str] = None
    threshold: Optional[float] = None
    left: Optional[TreeNode] = None
    right: Optional[TreeNode] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_children(self) -> "TreeNode":
        is_split = self.feature is not None
        has_children = self.left is not None and self.right is not None
        if is_split != has_children or (is_split and self.threshold is None):
            raise ValueError("internal nodes need a feature, a threshold and both children")
        if has_children and [a + b for a, b in zip(self.left.counts, self.right.counts)] != self.counts:
            raise ValueError("child class counts must add up to the parent's")
        return self

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def n(self) -> int:
        return sum(self.counts)

    def as_leaf(self) -> "TreeNode":
        return TreeNode(prediction=self.prediction, counts=self.counts)


class TreeModel(BaseModel):
    root: TreeNode
    cp: float = Field(0.0, ge=0, description="Complexity parameter the tree was pruned with")
    cv_accuracy: Optional[float] = Field(None, ge=0, le=1, description="Mean held-out accuracy at cp")
    feature_names: Tuple[str, ...] = METRIC_NAMES
    class_names: List[str]

    model_config = ConfigDict(frozen=True)


class CvParams(BaseModel):
    """Growth limits and the cross-validated complexity-parameter search."""
    folds: int = Field(5, ge=2)
    cp_grid: List[float] = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 0.0]
    min_node: int = Field(20, ge=1)
    min_leaf: int = Field(7, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)

    model_config = ConfigDict(frozen=True)

    @field_validator("cp_grid")
    @classmethod
    def _check_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("cp_grid must not be empty")
        if any(cp < 0 or cp > 1 for cp in v):
            raise ValueError("cp_grid values must lie in [0, 1]")
        if any(a <= b for a, b in zip(v, v[1:])):
            raise ValueError("cp_grid must be strictly descending")
        return v

    @classmethod
    def from_settings(cls, settings, seed: int = 0) -> "CvParams":
        return cls(
            folds=settings.CV_FOLDS,
            cp_grid=list(settings.CP_GRID),
            min_node=settings.MIN_NODE,
            min_leaf=settings.MIN_LEAF,
            seed=seed,
        )


TreeNode.model_rebuild()
