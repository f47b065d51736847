# tests/core/test_config.py

import os

import pytest
from pydantic import ValidationError

from shapemetrics.core.config import BASE_DIR, Settings, get_settings
from shapemetrics.schemas.tree import CvParams


def test_settings_load_from_test_env_file():
    """ .env.test is picked up through pytest-dotenv """
    settings = get_settings()
    assert settings.ENVIRONMENT == "test"
    assert settings.WORKERS == 1


def test_defaults_match_experiment_design():
    settings = get_settings()
    assert (settings.GRID_BINS_X, settings.GRID_BINS_Y) == (100, 100)
    assert settings.IMAGES_PER_CLASS == 100
    assert settings.TRAIN_FRACTION == pytest.approx(0.8)
    assert settings.ECCENTRICITY_FORM == "ratio"
    assert settings.CIRCULARITY_FORM == "perimeter_ratio"


def test_settings_not_cached_under_test(monkeypatch):
    """ With ENVIRONMENT=test every call re-reads the environment """
    monkeypatch.setenv("GRID_BINS_X", "64")
    assert get_settings().GRID_BINS_X == 64
    monkeypatch.setenv("GRID_BINS_X", "32")
    assert get_settings().GRID_BINS_X == 32


def test_invalid_values_rejected(monkeypatch):
    monkeypatch.setenv("TRAIN_FRACTION", "1.5")
    with pytest.raises(ValidationError):
        Settings()


def test_unknown_metric_form_rejected(monkeypatch):
    monkeypatch.setenv("ECCENTRICITY_FORM", "cubic")
    with pytest.raises(ValidationError):
        Settings()


@pytest.mark.parametrize("grid", ['[]', '[0.1, 0.3]', '[2.0, 0.1]'])
def test_cp_grid_validation(monkeypatch, grid):
    monkeypatch.setenv("CP_GRID", grid)
    with pytest.raises(ValidationError):
        Settings()


def test_cv_params_from_settings(monkeypatch):
    monkeypatch.setenv("CV_FOLDS", "4")
    monkeypatch.setenv("CP_GRID", "[0.2, 0.05, 0.0]")
    params = CvParams.from_settings(get_settings(), seed=9)
    assert params.folds == 4
    assert params.cp_grid == [0.2, 0.05, 0.0]
    assert params.seed == 9


def test_base_dir_is_project_root():
    assert os.path.isabs(BASE_DIR)
    assert os.path.isdir(os.path.join(BASE_DIR, "shapemetrics"))
