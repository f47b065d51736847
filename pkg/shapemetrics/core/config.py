# shapemetrics/core/config.py
import os
from functools import lru_cache
from typing import List, Literal, Optional

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Determine the base directory of the project (where shapemetrics/ and main.py live)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

# Used for normal CLI runs; under pytest the .env.test file is loaded by pytest-dotenv
DOTENV = os.getenv("DOTENV_PATH", os.path.join(BASE_DIR, '.env'))
if os.path.exists(DOTENV):
    load_dotenv(dotenv_path=DOTENV)


class Settings(BaseSettings):
    # App Environment
    ENVIRONMENT: str = "development"
    LOG_LEVEL: Optional[str] = None

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file_encoding='utf-8'
    )

    # Rasterization
    GRID_BINS_X: int = Field(100, ge=1)
    GRID_BINS_Y: int = Field(100, ge=1)

    # Metrics (both switches documented in DESIGN.md)
    ECCENTRICITY_FORM: Literal["ratio", "sqrt"] = "ratio"
    CIRCULARITY_FORM: Literal["perimeter_ratio", "isoperimetric"] = "perimeter_ratio"

    # Simulation
    MASTER_SEED: int = Field(20220101, ge=0, lt=2**64)
    CONE_SLOPE: float = Field(0.3, gt=0)

    # Experiment design
    IMAGES_PER_CLASS: int = Field(100, ge=2)
    TRAIN_FRACTION: float = Field(0.8, gt=0, lt=1)

    # Classification tree
    CV_FOLDS: int = Field(5, ge=2)
    MIN_NODE: int = Field(20, ge=1)
    MIN_LEAF: int = Field(7, ge=1)
    CP_GRID: List[float] = [0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 0.0]

    # Thread pool size for image generation; 1 keeps everything sequential
    WORKERS: int = Field(1, ge=1)

    # Sentry
    SENTRY_DSN: Optional[str] = None

    @field_validator("CP_GRID")
    @classmethod
    def _check_cp_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("CP_GRID must not be empty")
        if any(cp < 0 or cp > 1 for cp in v):
            raise ValueError("CP_GRID values must lie in [0, 1]")
        if any(a <= b for a, b in zip(v, v[1:])):
            raise ValueError("CP_GRID must be strictly descending")
        return v


# Use lru_cache to load settings only once for normal runs,
# but for testing, we want to be able to reload it.
if os.getenv('ENVIRONMENT') == 'test':
    def get_settings() -> Settings:
        """Get settings without caching for tests."""
        return Settings()
else:
    @lru_cache()
    def get_settings() -> Settings:
        """Get cached settings for CLI runs."""
        return Settings()

# Create a singleton instance accessible throughout the package
settings = get_settings()
