# tests/pipeline/test_simulators.py
import numpy as np
import pytest
from scipy import stats

from shapemetrics.pipeline.simulators import (
    MIXTURE_MEANS,
    NORMAL_PAIR_SPECS,
    QQ_OUTLIERS,
    SimulationError,
    gen_function,
    gen_gaussian,
    gen_mixture,
    gen_qq,
    gen_residual,
    simulate,
    split_counts,
    standard_normal,
)
from shapemetrics.schemas.scenario import VARIANTS, GaussianSpec, ScenarioSpec
from shapemetrics.utils.seeding import derive_seed, make_rng


# --- Seeding ---

def test_derive_seed_is_stable_and_key_sensitive():
    assert derive_seed(1, "functions", 0, 3) == derive_seed(1, "functions", 0, 3)
    assert derive_seed(1, "functions", 0, 3) != derive_seed(1, "functions", 0, 4)
    assert derive_seed(1, "functions", 0, 3) != derive_seed(2, "functions", 0, 3)
    assert 0 <= derive_seed(2**64 - 1, "x") < 2**64


def test_same_seed_same_stream():
    assert np.array_equal(make_rng(5).random(10), make_rng(5).random(10))


def test_standard_normal_is_finite_and_centred(rng):
    z = standard_normal(rng, 20000)
    assert np.isfinite(z).all()
    assert abs(z.mean()) < 0.05
    assert abs(z.std() - 1.0) < 0.05


def test_seed_streams_are_uncorrelated():
    draws = [standard_normal(make_rng(derive_seed(1, "functions", 0, rep)), 5000) for rep in range(5)]
    corr = np.corrcoef(draws)
    assert np.abs(corr[np.triu_indices(5, k=1)]).max() < 0.1


# --- Gaussian family ---

def test_gaussian_moments(rng):
    spec = GaussianSpec(mean=(2.0, -1.0), cov=((1.0, 0.9), (0.9, 1.0)))
    pts = gen_gaussian(20000, spec, rng).points
    assert pts.mean(axis=0) == pytest.approx([2.0, -1.0], abs=0.05)
    assert np.cov(pts.T) == pytest.approx(spec.cov_matrix, abs=0.05)


def test_gaussian_rejects_indefinite_covariance(rng):
    with pytest.raises(SimulationError):
        gen_gaussian(10, GaussianSpec(cov=((1.0, 2.0), (2.0, 1.0))), rng)


def test_gaussian_rejects_asymmetric_covariance():
    with pytest.raises(ValueError):
        GaussianSpec(cov=((1.0, 0.5), (0.2, 1.0)))


def test_gaussian_rejects_zero_covariance(rng):
    with pytest.raises(SimulationError, match="positive definite"):
        gen_gaussian(10, GaussianSpec(cov=((0.0, 0.0), (0.0, 0.0))), rng)


def test_normal_pair_variants_cover_scenarios():
    assert set(NORMAL_PAIR_SPECS) == set(VARIANTS["normal_pair"])
    assert NORMAL_PAIR_SPECS["shifted"].mean == (10.0, 10.0)
    assert NORMAL_PAIR_SPECS["tight"].cov[0][0] == 0.001


# --- Mixtures ---

@pytest.mark.parametrize("n,k,expected", [(1000, 3, [334, 333, 333]), (10, 4, [3, 3, 2, 2]), (2, 4, [1, 1, 0, 0])])
def test_split_counts(n, k, expected):
    assert split_counts(n, k) == expected
    assert sum(split_counts(n, k)) == n


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_mixture_components(k, rng):
    pts = gen_mixture(k, 4000, rng).points
    assert pts.shape == (4000, 2)
    # every point is near one of the first k means
    means = np.array(MIXTURE_MEANS[:k])
    nearest = np.argmin(((pts[:, None, :] - means[None]) ** 2).sum(axis=-1), axis=1)
    assert np.bincount(nearest, minlength=k).min() > 4000 / k * 0.9


def test_mixture_rejects_bad_k(rng):
    with pytest.raises(SimulationError):
        gen_mixture(5, 100, rng)


def test_single_component_mixture_is_standard_gaussian():
    one = gen_mixture(1, 500, make_rng(9)).points
    plain = gen_gaussian(500, GaussianSpec(), make_rng(9)).points
    assert np.array_equal(one, plain)


def test_four_components_share_points_equally(rng):
    pts = gen_mixture(4, 1000, rng).points
    means = np.array(MIXTURE_MEANS)
    nearest = np.argmin(((pts[:, None, :] - means[None]) ** 2).sum(axis=-1), axis=1)
    assert np.bincount(nearest, minlength=4).tolist() == [250, 250, 250, 250]
    # components are stacked in mean order
    assert nearest.tolist() == np.repeat(np.arange(4), 250).tolist()


# --- QQ ---

def test_qq_theoretical_quantiles(rng):
    pts = gen_qq("none", rng).points
    expected = stats.norm.ppf((np.arange(1, 1001) - 0.5) / 1000)
    assert np.allclose(pts[:, 0], expected)
    assert np.all(np.diff(pts[:, 1]) >= 0)


def test_qq_major_has_upper_tail(rng):
    pts = gen_qq("major", rng).points
    # the 10 shifted draws sit around 10, far above the clean sample
    assert np.count_nonzero(pts[:, 1] > 6.0) == QQ_OUTLIERS


def test_qq_unknown_level(rng):
    with pytest.raises(SimulationError):
        gen_qq("extreme", rng)


def test_qq_clean_sample_stays_in_range(rng):
    assert np.abs(gen_qq("none", rng).points[:, 1]).max() < 4.5


@pytest.mark.parametrize("level", ["minor", "medium", "major"])
def test_qq_single_point_has_no_outliers(level):
    pts = simulate(ScenarioSpec(family="qq", variant=level, n_points=1, seed=4))
    assert len(pts) == 1
    assert np.isfinite(pts.points).all()
    assert pts.points[0, 0] == 0.0


def test_qq_two_points_keep_one_outlier():
    pts = simulate(ScenarioSpec(family="qq", variant="major", n_points=2, seed=4)).points
    assert pts.shape == (2, 2)
    # the shifted draw sits near 10, the clean one near 0
    assert pts[1, 1] > 5.0 > pts[0, 1]


def test_qq_rejects_too_many_outliers(rng):
    with pytest.raises(SimulationError):
        gen_qq("minor", rng, n=5, n_outliers=5)


# --- Functions ---

@pytest.mark.parametrize(
    "kind,f",
    [
        ("linear", lambda x: 3 * x),
        ("sine", lambda x: 4 * np.sin(x)),
        ("parabola", lambda x: x ** 2),
        ("poly", lambda x: x ** 4 + 10 * x ** 3 - 7 * x ** 2),
    ],
)
def test_noise_free_functions(kind, f, rng):
    pts = gen_function(kind, 500, rng, noise_scale=0.0).points
    assert np.allclose(pts[:, 1], f(pts[:, 0]))


def test_function_x_spread(rng):
    x = gen_function("linear", 20000, rng).x
    assert x.std() == pytest.approx(10.0, rel=0.05)


def test_sine_stays_in_band(rng):
    y = gen_function("sine", 1000, rng).y
    assert y.min() >= -6.5 and y.max() <= 6.5


def test_parabola_bounded_below(rng):
    assert gen_function("parabola", 1000, rng).y.min() >= -5.0


# --- Residuals ---

def test_random_residuals_have_unit_spread(rng):
    resid = gen_residual("random", 1000, rng).points[:, 1]
    assert 0.9 < resid.std() < 1.1


def test_cone_spread_grows(rng):
    pts = gen_residual("cone", 20000, rng).points
    low = pts[pts[:, 0] < 3, 1].std()
    high = pts[pts[:, 0] > 7, 1].std()
    assert high > 2 * low


def test_multi_is_symmetric_bowtie(rng):
    pts = gen_residual("multi", 20000, rng).points
    assert pts[:, 0].min() < 0 < pts[:, 0].max()
    assert pts[np.abs(pts[:, 0]) < 1, 1].std() < pts[np.abs(pts[:, 0]) > 8, 1].std()


def test_binom_is_almond(rng):
    pts = gen_residual("binom", 20000, rng).points
    middle = pts[np.abs(pts[:, 0] - 0.5) < 0.1, 1].std()
    edges = pts[np.abs(pts[:, 0] - 0.5) > 0.4, 1].std()
    assert middle > edges


def test_unknown_residual_kind(rng):
    with pytest.raises(SimulationError):
        gen_residual("fan", 10, rng)


# --- Dispatch ---

@pytest.mark.parametrize("family", sorted(VARIANTS))
def test_simulate_every_variant(family):
    for variant in VARIANTS[family]:
        pts = simulate(ScenarioSpec(family=family, variant=variant, n_points=200, seed=3))
        assert len(pts) == 200
        assert np.isfinite(pts.points).all()


def test_simulate_is_deterministic():
    spec = ScenarioSpec(family="function", variant="sine", n_points=300, seed=42)
    assert simulate(spec).points.tobytes() == simulate(spec).points.tobytes()
    other = spec.model_copy(update={"seed": 43})
    assert not np.array_equal(simulate(spec).points, simulate(other).points)


def test_scenario_rejects_unknown_variant():
    with pytest.raises(ValueError, match="not valid for family"):
        ScenarioSpec(family="qq", variant="sine")
