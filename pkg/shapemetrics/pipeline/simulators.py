"""
Seedable generators for every simulated scenario.

Generators take an explicit `numpy.random.Generator`; nothing here touches
global random state. Normal draws use inverse-CDF sampling (`ndtri` of
uniforms) so a seed maps to the same numbers on every platform.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import special, stats

from shapemetrics.schemas.points import PointSet
from shapemetrics.schemas.scenario import GaussianSpec, ScenarioSpec
from shapemetrics.utils.seeding import make_rng

logger = logging.getLogger(__name__)

# Mixture component means, used in order for k = 1..4
MIXTURE_MEANS: Tuple[Tuple[float, float], ...] = ((0.0, 0.0), (10.0, 10.0), (10.0, 0.0), (0.0, 10.0))

# Shift of the contaminating N(δ, 1) component per outlier level
QQ_SHIFTS: Dict[str, Optional[float]] = {"none": None, "minor": 3.0, "medium": 5.0, "major": 10.0}
QQ_SAMPLE_SIZE = 1000
QQ_OUTLIERS = 10

# X ~ N(0, 100) for the function scenarios (variance 100 → sd 10)
FUNCTION_X_SD = 10.0
FUNCTION_NOISE_SD: Dict[str, float] = {"linear": 1.0, "sine": 0.5, "parabola": 1.0, "poly": 1.0}

DEFAULT_CONE_SLOPE = 0.3

NORMAL_PAIR_SPECS: Dict[str, GaussianSpec] = {
    "standard": GaussianSpec(),
    "shifted": GaussianSpec(mean=(10.0, 10.0)),
    "correlated": GaussianSpec(cov=((1.0, 0.9), (0.9, 1.0))),
    "tight": GaussianSpec(cov=((0.001, 0.0), (0.0, 0.001))),
}


# --------------------------------------------------------------------------- #
#  Custom error types                                                         #
# --------------------------------------------------------------------------- #
class SimulationError(Exception):
    """A scenario cannot be generated."""


# --------------------------------------------------------------------------- #
#  Internal helpers                                                           #
# --------------------------------------------------------------------------- #
def standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    # ndtri(0) is -inf; 0.0 has probability 2**-53 but must still map to a finite draw
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return special.ndtri(u)


def _check_n(n: int) -> None:
    if n < 1:
        raise SimulationError("n must be at least 1")


# --------------------------------------------------------------------------- #
#  Generators                                                                 #
# --------------------------------------------------------------------------- #
def gen_gaussian(n: int, spec: GaussianSpec, rng: np.random.Generator) -> PointSet:
    """n i.i.d. draws from N(mean, cov) via the Cholesky factor of cov."""
    _check_n(n)
    try:
        chol = np.linalg.cholesky(spec.cov_matrix)
    except np.linalg.LinAlgError as exc:
        raise SimulationError("covariance must be positive definite") from exc
    z = standard_normal(rng, (n, 2))
    return PointSet(points=np.asarray(spec.mean) + z @ chol.T)


def split_counts(n: int, k: int) -> List[int]:
    """n split as evenly as possible over k parts; the first parts take the remainder."""
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def gen_mixture(k: int, n: int, rng: np.random.Generator) -> PointSet:
    """Equal-weight mixture of k unit-covariance Gaussians at the first k MIXTURE_MEANS."""
    if k not in (1, 2, 3, 4):
        raise SimulationError(f"mixture needs 1 to 4 components, got {k}")
    _check_n(n)
    parts = [
        gen_gaussian(count, GaussianSpec(mean=MIXTURE_MEANS[i]), rng).points
        for i, count in enumerate(split_counts(n, k))
        if count > 0
    ]
    return PointSet(points=np.vstack(parts))


def gen_qq(level: str, rng: np.random.Generator, n: int = QQ_SAMPLE_SIZE, n_outliers: int = QQ_OUTLIERS) -> PointSet:
    """
    Normal QQ-plot points (theoretical quantile, sorted sample value). The
    sample is n standard normals, or n - n_outliers of them plus n_outliers
    draws from N(δ, 1) at the level's shift δ. With n_outliers = 0 the
    sample is clean whatever the level.
    """
    if level not in QQ_SHIFTS:
        raise SimulationError(f"unknown outlier level '{level}'")
    _check_n(n)
    shift = QQ_SHIFTS[level]
    if shift is not None and not 0 <= n_outliers < n:
        raise SimulationError("n_outliers must be between 0 and n - 1")
    if shift is None or n_outliers == 0:
        sample = standard_normal(rng, n)
    else:
        clean = standard_normal(rng, n - n_outliers)
        outliers = shift + standard_normal(rng, n_outliers)
        sample = np.concatenate([clean, outliers])
    theoretical = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    return PointSet(points=np.column_stack([theoretical, np.sort(sample)]))


def gen_function(kind: str, n: int, rng: np.random.Generator, noise_scale: float = 1.0) -> PointSet:
    """
    X ~ N(0, 100) and Y = f(X) + ε for f in linear (3X), sine (4 sin X),
    parabola (X²) and poly (X⁴ + 10X³ - 7X²). `noise_scale` multiplies ε
    (0 gives the noise-free curve).
    """
    if kind not in FUNCTION_NOISE_SD:
        raise SimulationError(f"unknown function kind '{kind}'")
    _check_n(n)
    x = FUNCTION_X_SD * standard_normal(rng, n)
    eps = noise_scale * FUNCTION_NOISE_SD[kind] * standard_normal(rng, n)
    if kind == "linear":
        y = 3.0 * x
    elif kind == "sine":
        y = 4.0 * np.sin(x)
    elif kind == "parabola":
        y = x ** 2
    else:
        y = x ** 4 + 10.0 * x ** 3 - 7.0 * x ** 2
    return PointSet(points=np.column_stack([x, y + eps]))


def gen_residual(kind: str, n: int, rng: np.random.Generator, slope: float = DEFAULT_CONE_SLOPE) -> PointSet:
    """
    (fitted value, residual) pairs for the four variance patterns:
    random scatter, cone (sd grows with the fit), binom (sd² = f(1-f), an
    almond/eye) and multi (symmetric bowtie from multiplicative error).
    """
    _check_n(n)
    if kind == "random":
        fitted = rng.uniform(0.0, 10.0, n)
        sd = np.ones(n)
    elif kind == "cone":
        fitted = rng.uniform(0.0, 10.0, n)
        sd = slope * fitted
    elif kind == "binom":
        fitted = rng.uniform(0.02, 0.98, n)
        sd = np.sqrt(fitted * (1.0 - fitted))
    elif kind == "multi":
        fitted = rng.uniform(-10.0, 10.0, n)
        sd = slope * np.abs(fitted)
    else:
        raise SimulationError(f"unknown residual kind '{kind}'")
    return PointSet(points=np.column_stack([fitted, sd * standard_normal(rng, n)]))


# --------------------------------------------------------------------------- #
#  Scenario dispatch                                                          #
# --------------------------------------------------------------------------- #
def simulate(spec: ScenarioSpec, settings=None) -> PointSet:
    """Generate the PointSet a ScenarioSpec describes; same spec → same bytes."""
    rng = make_rng(spec.seed)
    slope = getattr(settings, "CONE_SLOPE", DEFAULT_CONE_SLOPE)
    n = spec.n_points

    if spec.family == "normal_pair":
        points = gen_gaussian(n, NORMAL_PAIR_SPECS[spec.variant], rng)
    elif spec.family == "mixture":
        points = gen_mixture(int(spec.variant), n, rng)
    elif spec.family == "qq":
        points = gen_qq(spec.variant, rng, n=n, n_outliers=min(QQ_OUTLIERS, n - 1))
    elif spec.family == "function":
        points = gen_function(spec.variant, n, rng)
    else:
        points = gen_residual(spec.variant, n, rng, slope=slope)

    logger.debug("Simulated %s (seed=%d): %d points", spec.label, spec.seed, len(points))
    return points
