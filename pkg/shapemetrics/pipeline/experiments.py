"""
End-to-end experiments: simulate images per class, measure them, split
80/20 per class, fit a cross-validated tree, score the validation rows with an
exact binomial interval, and aggregate split usage over a suite.

Every random stream is derived from (master seed, experiment name, ...) so a
result never depends on execution order or on which other experiments ran.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from shapemetrics.core.config import get_settings
from shapemetrics.pipeline import cart
from shapemetrics.pipeline.metrics import MetricsError, metric_vector
from shapemetrics.pipeline.rasterizer import RasterizeError, rasterize
from shapemetrics.pipeline.simulators import SimulationError, simulate
from shapemetrics.schemas.experiment import (
    ExperimentFailure,
    ExperimentResult,
    ExperimentSpec,
    SuiteConfig,
    SuiteReport,
    train_count,
)
from shapemetrics.schemas.metrics import METRIC_NAMES
from shapemetrics.schemas.scenario import ScenarioSpec
from shapemetrics.schemas.tree import CvParams, LabeledDataset
from shapemetrics.utils import export
from shapemetrics.utils.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

# Shared binning window for the three normal-pair experiments
NORMAL_CANVAS: Tuple[float, float] = (-5.0, 15.0)


# --------------------------------------------------------------------------- #
#  Custom error types                                                         #
# --------------------------------------------------------------------------- #
class ExperimentError(Exception):
    """A stage of an experiment failed."""

    def __init__(self, experiment: str, stage: str, message: str):
        super().__init__(f"[{experiment}/{stage}] {message}")
        self.experiment = experiment
        self.stage = stage
        self.message = message


class SplitError(Exception):
    """A class has too few rows to split."""


# --------------------------------------------------------------------------- #
#  Statistics helpers                                                         #
# --------------------------------------------------------------------------- #
def clopper_pearson(successes: int, n: int, level: float = 0.95) -> Tuple[float, float]:
    """Exact binomial interval from Beta quantiles."""
    if n < 1 or not 0 <= successes <= n:
        raise ValueError(f"need 0 <= successes <= n and n >= 1, got successes={successes}, n={n}")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    alpha = 1.0 - level
    low = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, n - successes + 1))
    high = 1.0 if successes == n else float(stats.beta.ppf(1 - alpha / 2, successes + 1, n - successes))
    return low, high


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> List[List[int]]:
    """Rows = true class, columns = predicted class."""
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return matrix.tolist()


def stratified_split(
    data: LabeledDataset, fraction: float, rng: np.random.Generator
) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Per class: floor(fraction·n_c) rows, drawn without replacement, go to
    training and the rest to validation (at least one row on each side).
    """
    if not 0 < fraction < 1:
        raise SplitError("fraction must lie in (0, 1)")
    counts = data.class_counts()
    if counts.min() < 2:
        raise SplitError(f"every class needs at least 2 rows, got {counts.tolist()}")
    train_idx: List[np.ndarray] = []
    valid_idx: List[np.ndarray] = []
    for c in range(data.n_classes):
        idx = rng.permutation(np.flatnonzero(data.labels == c))
        k = min(max(train_count(idx.shape[0], fraction), 1), idx.shape[0] - 1)
        train_idx.append(idx[:k])
        valid_idx.append(idx[k:])
    return data.subset(np.concatenate(train_idx)), data.subset(np.concatenate(valid_idx))


# --------------------------------------------------------------------------- #
#  Experiment definitions                                                     #
# --------------------------------------------------------------------------- #
def _classes(family: str, variants: Sequence[str], n_points: int) -> List[ScenarioSpec]:
    return [ScenarioSpec(family=family, variant=v, n_points=n_points) for v in variants]


def default_suite(config: SuiteConfig) -> List[ExperimentSpec]:
    """The seven standard experiments, in report order."""
    canvas = config.grid.model_copy(update={"range_x": NORMAL_CANVAS, "range_y": NORMAL_CANVAS})
    n = config.n_points
    rows = [
        ("normal_means", _classes("normal_pair", ["standard", "shifted"], n), canvas, 0.525),
        ("normal_correlated", _classes("normal_pair", ["standard", "correlated"], n), canvas, 1.0),
        ("normal_scale", _classes("normal_pair", ["standard", "tight"], n), canvas, 1.0),
        ("gaussian_mixtures", _classes("mixture", ["1", "2", "3", "4"], n), config.grid, 0.975),
        ("qq_outliers", _classes("qq", ["none", "minor", "medium", "major"], n), config.grid, 0.95),
        ("functions", _classes("function", ["linear", "sine", "parabola", "poly"], n), config.grid, 0.9375),
        ("ols_residuals", _classes("residual", ["random", "cone", "binom", "multi"], n), config.grid, 0.9375),
    ]
    return [
        ExperimentSpec(
            name=name,
            classes=classes,
            images_per_class=config.images_per_class,
            train_fraction=config.train_fraction,
            grid=grid,
            master_seed=config.master_seed,
            reference_accuracy=reference,
        )
        for name, classes, grid, reference in rows
    ]


def experiment_names() -> List[str]:
    return [spec.name for spec in default_suite(SuiteConfig())]


# --------------------------------------------------------------------------- #
#  Dataset construction                                                       #
# --------------------------------------------------------------------------- #
def _measure_one(
    spec: ExperimentSpec, class_idx: int, rep: int, settings, image_dir: Optional[Path]
) -> Tuple[float, ...]:
    scenario = spec.classes[class_idx].model_copy(
        update={"seed": derive_seed(spec.master_seed, spec.name, class_idx, rep)}
    )
    try:
        points = simulate(scenario, settings)
    except SimulationError as exc:
        raise ExperimentError(spec.name, "simulate", str(exc)) from exc
    try:
        img = rasterize(points, spec.grid)
    except RasterizeError as exc:
        raise ExperimentError(spec.name, "rasterize", f"{scenario.label} #{rep}: {exc}") from exc
    if image_dir is not None:
        export.write_pgm(img, image_dir / spec.name / f"{scenario.variant}_{rep:03d}.pgm")
    try:
        return metric_vector(img, settings).as_tuple()
    except (MetricsError, ValueError) as exc:  # ValueError: MetricVector validation
        raise ExperimentError(spec.name, "metrics", f"{scenario.label} #{rep}: {exc}") from exc


def build_dataset(spec: ExperimentSpec, settings=None, image_dir: Optional[Path] = None) -> LabeledDataset:
    """Simulate, rasterize and measure `images_per_class` images for every class."""
    settings = settings or get_settings()
    tasks = [(c, rep) for c in range(len(spec.classes)) for rep in range(spec.images_per_class)]

    def run(task: Tuple[int, int]) -> Tuple[float, ...]:
        return _measure_one(spec, task[0], task[1], settings, image_dir)

    if settings.WORKERS > 1:
        # map() keeps task order, so rows do not depend on scheduling
        with ThreadPoolExecutor(max_workers=settings.WORKERS) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(task) for task in tasks]

    logger.debug("Built %d metric rows for %s", len(rows), spec.name)
    return LabeledDataset(
        features=np.array(rows, dtype=float),
        labels=[c for c, _ in tasks],
        class_names=spec.class_names,
        feature_names=METRIC_NAMES,
    )


# --------------------------------------------------------------------------- #
#  Running                                                                    #
# --------------------------------------------------------------------------- #
def run_experiment(
    spec: ExperimentSpec,
    settings=None,
    params: Optional[CvParams] = None,
    image_dir: Optional[Path] = None,
) -> ExperimentResult:
    """Full pipeline for one experiment; failures raise ExperimentError tagged with the stage."""
    settings = settings or get_settings()
    if params is None:
        params = CvParams.from_settings(settings)
    params = params.model_copy(update={"seed": derive_seed(spec.master_seed, spec.name, "cv")})
    logger.info("Running experiment %s (%d classes × %d images)", spec.name, len(spec.classes), spec.images_per_class)

    data = build_dataset(spec, settings, image_dir)

    try:
        train, validation = stratified_split(
            data, spec.train_fraction, make_rng(derive_seed(spec.master_seed, spec.name, "split"))
        )
    except SplitError as exc:
        raise ExperimentError(spec.name, "split", str(exc)) from exc

    try:
        model = cart.fit(train, params)
    except cart.CartError as exc:
        raise ExperimentError(spec.name, "fit", str(exc)) from exc

    try:
        predicted = cart.predict_many(model, validation.features)
    except cart.CartError as exc:
        raise ExperimentError(spec.name, "evaluate", str(exc)) from exc

    correct = int(np.count_nonzero(predicted == validation.labels))
    n_valid = validation.n_rows
    low, high = clopper_pearson(correct, n_valid)
    result = ExperimentResult(
        name=spec.name,
        class_names=spec.class_names,
        accuracy=correct / n_valid,
        ci_low=low,
        ci_high=high,
        confusion=confusion_matrix(validation.labels, predicted, validation.n_classes),
        n_validation=n_valid,
        cp=model.cp,
        cv_accuracy=model.cv_accuracy if model.cv_accuracy is not None else 0.0,
        tree=model,
        reference_accuracy=spec.reference_accuracy,
    )
    logger.info(
        "Experiment %s: accuracy %.4f (%.4f, %.4f) on %d validation images",
        spec.name, result.accuracy, low, high, n_valid,
    )
    return result


def usage_table(results: List[ExperimentResult]) -> Dict[str, int]:
    """Split counts per metric over all fitted trees, in metric order."""
    if not results:
        return {name: 0 for name in METRIC_NAMES}
    counts = cart.feature_usage([r.tree for r in results])
    return dict(zip(METRIC_NAMES, counts))


def run_suite(config: SuiteConfig, settings=None, image_dir: Optional[Path] = None) -> SuiteReport:
    """
    Run the selected experiments and aggregate split usage. A failing
    experiment is recorded in `failures` and the report is flagged partial.
    """
    settings = settings or get_settings()
    specs = default_suite(config)
    if config.experiments is not None:
        unknown = sorted(set(config.experiments) - {s.name for s in specs})
        if unknown:
            raise ValueError(f"unknown experiment(s): {', '.join(unknown)}")
        specs = [s for s in specs if s.name in config.experiments]
    if not specs:
        raise ValueError("no experiments selected")

    results: List[ExperimentResult] = []
    failures: List[ExperimentFailure] = []
    for spec in specs:
        try:
            results.append(run_experiment(spec, settings, config.tree_params, image_dir))
        except ExperimentError as exc:
            logger.error("Experiment %s failed at stage %s: %s", exc.experiment, exc.stage, exc.message, exc_info=True)
            failures.append(ExperimentFailure(experiment=exc.experiment, stage=exc.stage, message=exc.message))

    return SuiteReport(
        master_seed=config.master_seed,
        grid=config.grid,
        tree_params=config.tree_params,
        results=results,
        usage=usage_table(results),
        failures=failures,
        partial=bool(failures),
    )
