"""
Binary classification tree: Gini growth, cost-complexity pruning, k-fold
cross-validated choice of the complexity parameter, and split-usage counts.

Rows with `x[feature] < threshold` go left. Thresholds are midpoints between
consecutive distinct values. Equal-gain splits resolve to the lowest feature
index, then the lowest threshold; leaf ties resolve to the lowest class id.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shapemetrics.schemas.tree import CvParams, LabeledDataset, TreeModel, TreeNode
from shapemetrics.utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Gains at or below this are treated as zero
_MIN_GAIN = 1e-12


# --------------------------------------------------------------------------- #
#  Custom error types                                                         #
# --------------------------------------------------------------------------- #
class CartError(Exception):
    """The tree cannot be fitted or used."""


class InsufficientDataError(CartError):
    """Too few rows (overall or per class) for the requested operation."""


# --------------------------------------------------------------------------- #
#  Split search                                                               #
# --------------------------------------------------------------------------- #
def _weighted_gini(counts: np.ndarray) -> np.ndarray:
    """n·Gini(counts) = n - Σc²/n along the last axis."""
    n = counts.sum(axis=-1)
    return n - (counts ** 2).sum(axis=-1) / n


def best_split(
    X: np.ndarray, y: np.ndarray, n_classes: int, min_leaf: int = 1
) -> Optional[Tuple[int, float, float]]:
    """
    (feature, threshold, gain) of the split with the largest Gini reduction,
    where gain = n·Gini(parent) - Σ n_child·Gini(child). None when no split
    leaves `min_leaf` rows on both sides with positive gain.
    """
    n = y.shape[0]
    if n < 2:
        return None
    onehot = np.eye(n_classes)[y]
    total = onehot.sum(axis=0)
    parent = float(_weighted_gini(total))
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left

    best: Optional[Tuple[int, float, float]] = None
    best_gain = _MIN_GAIN
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
        if not valid.any():
            continue
        gain = parent - (_weighted_gini(left) + _weighted_gini(total - left))
        gain = np.where(valid, gain, -np.inf)
        i = int(np.argmax(gain))  # first maximum → lowest threshold
        if gain[i] > best_gain:
            threshold = (xs[i] + xs[i + 1]) / 2.0
            if threshold <= xs[i]:  # adjacent floats: midpoint rounded down
                threshold = xs[i + 1]
            best, best_gain = (f, float(threshold), float(gain[i])), float(gain[i])
    return best


# --------------------------------------------------------------------------- #
#  Growing and pruning                                                        #
# --------------------------------------------------------------------------- #
def _leaf(counts: np.ndarray) -> TreeNode:
    return TreeNode(prediction=int(np.argmax(counts)), counts=[int(c) for c in counts])


def _grow_node(
    X: np.ndarray, y: np.ndarray, n_classes: int, params: CvParams, names: Sequence[str]
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    if y.shape[0] < params.min_node or counts.max() == y.shape[0]:
        return _leaf(counts)
    split = best_split(X, y, n_classes, params.min_leaf)
    if split is None:
        return _leaf(counts)
    f, threshold, _ = split
    go_left = X[:, f] < threshold
    return TreeNode(
        prediction=int(np.argmax(counts)),
        counts=[int(c) for c in counts],
        feature=f,
        feature_name=names[f],
        threshold=threshold,
        left=_grow_node(X[go_left], y[go_left], n_classes, params, names),
        right=_grow_node(X[~go_left], y[~go_left], n_classes, params, names),
    )


def grow(data: LabeledDataset, params: CvParams) -> TreeModel:
    """Fully grown (unpruned) tree, limited only by min_node, min_leaf, purity and zero gain."""
    if data.n_rows == 0:
        raise InsufficientDataError("cannot fit a tree on empty data")
    root = _grow_node(data.features, data.labels, data.n_classes, params, data.feature_names)
    return TreeModel(root=root, cp=0.0, feature_names=data.feature_names, class_names=data.class_names)


def _errors(node: TreeNode) -> int:
    return node.n - max(node.counts)


def _prune_node(node: TreeNode, alpha: float) -> Tuple[TreeNode, float]:
    """Smallest subtree minimizing (misclassified rows) + alpha·(leaves); returns it with its cost."""
    as_leaf_cost = _errors(node) + alpha
    if node.is_leaf:
        return node, as_leaf_cost
    left, left_cost = _prune_node(node.left, alpha)
    right, right_cost = _prune_node(node.right, alpha)
    if as_leaf_cost <= left_cost + right_cost + 1e-9:
        return node.as_leaf(), as_leaf_cost
    return node.model_copy(update={"left": left, "right": right}), left_cost + right_cost


def prune(model: TreeModel, cp: float) -> TreeModel:
    """
    Cost-complexity pruning: minimize R(T) + cp·|leaves|·R(root) with R the
    misclassification rate. Larger cp never yields more leaves.
    """
    if cp < 0:
        raise CartError("cp must be non-negative")
    alpha = cp * _errors(model.root)
    root, _ = _prune_node(model.root, alpha)
    return model.model_copy(update={"root": root, "cp": cp})


# --------------------------------------------------------------------------- #
#  Prediction                                                                 #
# --------------------------------------------------------------------------- #
def predict(model: TreeModel, features: Sequence[float]) -> int:
    """Class id for one feature row."""
    x = np.asarray(features, dtype=float).reshape(-1)
    if x.shape[0] != len(model.feature_names):
        raise CartError(f"expected {len(model.feature_names)} features, got {x.shape[0]}")
    if not np.isfinite(x).all():
        raise CartError("features must be finite")
    node = model.root
    while not node.is_leaf:
        node = node.left if x[node.feature] < node.threshold else node.right
    return node.prediction


def predict_many(model: TreeModel, X: np.ndarray) -> np.ndarray:
    """Class ids for every row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise CartError(f"expected rows of {len(model.feature_names)} features")
    if not np.isfinite(X).all():
        raise CartError("features must be finite")
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(model.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.prediction
            continue
        go_left = X[idx, node.feature] < node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


# --------------------------------------------------------------------------- #
#  Cross-validation                                                           #
# --------------------------------------------------------------------------- #
def stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per row; each class is shuffled then dealt round-robin over the folds."""
    fold_of = np.empty(labels.shape[0], dtype=np.int64)
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        fold_of[idx] = np.arange(idx.shape[0]) % folds
    return fold_of


def cv_accuracy_by_cp(data: LabeledDataset, params: CvParams, rng: np.random.Generator) -> Dict[float, float]:
    """Mean held-out accuracy for every cp in the grid over stratified folds."""
    counts = data.class_counts()
    present = counts[counts > 0]
    if data.n_rows < params.folds or present.min() < params.folds:
        raise InsufficientDataError(
            f"{params.folds}-fold cross-validation needs at least {params.folds} rows per class, "
            f"got {counts.tolist()}"
        )
    fold_of = stratified_folds(data.labels, params.folds, rng)
    totals = np.zeros(len(params.cp_grid))
    for k in range(params.folds):
        held_out = fold_of == k
        tree = grow(data.subset(np.flatnonzero(~held_out)), params)
        X_test, y_test = data.features[held_out], data.labels[held_out]
        for j, cp in enumerate(params.cp_grid):
            totals[j] += float(np.mean(predict_many(prune(tree, cp), X_test) == y_test))
        logger.debug("CV fold %d/%d done (%d held out)", k + 1, params.folds, int(held_out.sum()))
    return {cp: totals[j] / params.folds for j, cp in enumerate(params.cp_grid)}


def select_cp(scores: Dict[float, float]) -> float:
    """Best mean accuracy; ties go to the largest cp (simplest tree)."""
    best = max(scores.values())
    return max(cp for cp, acc in scores.items() if acc >= best - 1e-12)


def cross_validate_cp(data: LabeledDataset, params: CvParams, rng: np.random.Generator) -> float:
    """Grid cp with the highest mean held-out accuracy (ties → largest cp)."""
    return select_cp(cv_accuracy_by_cp(data, params, rng))


# --------------------------------------------------------------------------- #
#  Public fit / diagnostics                                                   #
# --------------------------------------------------------------------------- #
def fit(data: LabeledDataset, params: CvParams, rng: Optional[np.random.Generator] = None) -> TreeModel:
    """Grow on all rows, then prune with the cross-validated cp. One class present → single leaf."""
    if data.n_rows == 0:
        raise InsufficientDataError("cannot fit a tree on empty data")
    if np.count_nonzero(data.class_counts()) < 2:
        logger.info("Only one class present; fitting a single leaf")
        return TreeModel(root=_leaf(data.class_counts()), cp=0.0,
                         feature_names=data.feature_names, class_names=data.class_names)

    rng = rng if rng is not None else make_rng(params.seed)
    scores = cv_accuracy_by_cp(data, params, rng)
    cp = select_cp(scores)
    model = prune(grow(data, params), cp)
    logger.info(
        "Fitted tree on %d rows: cp=%g, cv accuracy=%.4f, %d splits",
        data.n_rows, cp, scores[cp], n_internal(model),
    )
    return model.model_copy(update={"cv_accuracy": scores[cp]})


def _walk(node: TreeNode):
    yield node
    if not node.is_leaf:
        yield from _walk(node.left)
        yield from _walk(node.right)


def n_leaves(model: TreeModel) -> int:
    return sum(1 for node in _walk(model.root) if node.is_leaf)


def n_internal(model: TreeModel) -> int:
    return sum(1 for node in _walk(model.root) if not node.is_leaf)


def feature_usage(models: List[TreeModel]) -> List[int]:
    """Number of internal nodes splitting on each feature, summed over all models."""
    if not models:
        raise CartError("feature_usage needs at least one model")
    counts = [0] * len(models[0].feature_names)
    for model in models:
        for node in _walk(model.root):
            if not node.is_leaf:
                counts[node.feature] += 1
    return counts
