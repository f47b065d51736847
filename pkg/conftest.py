"""
conftest.py – shared fixtures for the shapemetrics test suite.

Key points
----------
* `.env.test` (loaded by pytest-dotenv) sets ENVIRONMENT=test, so
  `get_settings()` is not cached and monkeypatched env vars take effect.
* Every random stream comes from a fixed seed; nothing depends on test order.
* Suite-level fixtures shrink the design (few images, two experiments) so the
  end-to-end tests stay fast. The full-size runs are marked `slow`.
"""
from typing import Callable

import numpy as np
import pytest
from click.testing import CliRunner

from shapemetrics.core.config import Settings, get_settings
from shapemetrics.schemas.experiment import SuiteConfig
from shapemetrics.schemas.points import BinaryImage, GridSpec
from shapemetrics.schemas.tree import CvParams
from shapemetrics.utils.seeding import make_rng
from tests.utils import image_from_pixels, render_disk


# --------------------------------------------------------------------------
# Settings / randomness
# --------------------------------------------------------------------------
@pytest.fixture
def settings() -> Settings:
    return get_settings()


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(12345)


@pytest.fixture
def make_rng_for() -> Callable[[int], np.random.Generator]:
    """Factory so a test can rebuild the same stream twice."""
    return make_rng


# --------------------------------------------------------------------------
# Canned images
# --------------------------------------------------------------------------
@pytest.fixture
def single_pixel() -> BinaryImage:
    return image_from_pixels([[1]])


@pytest.fixture
def filled_square() -> BinaryImage:
    """10x10 white square in the middle of a 20x20 canvas."""
    grid = np.zeros((20, 20), dtype=bool)
    grid[5:15, 5:15] = True
    return image_from_pixels(grid)


@pytest.fixture
def horizontal_line() -> BinaryImage:
    """One row of 9 white pixels."""
    return image_from_pixels([[1] * 9])


@pytest.fixture
def disk() -> BinaryImage:
    return render_disk(radius=20)


# --------------------------------------------------------------------------
# Small experiment designs
# --------------------------------------------------------------------------
@pytest.fixture
def small_tree_params() -> CvParams:
    return CvParams(folds=3, min_node=6, min_leaf=2)


@pytest.fixture
def small_suite_config(small_tree_params: CvParams) -> SuiteConfig:
    return SuiteConfig(
        master_seed=7,
        grid=GridSpec(bins_x=40, bins_y=40),
        images_per_class=10,
        n_points=300,
        experiments=["functions", "normal_scale"],
        tree_params=small_tree_params,
    )


# --------------------------------------------------------------------------
# CLI
# --------------------------------------------------------------------------
@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()
