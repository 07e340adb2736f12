"""
Shared fixtures for the STMDF-AD test suite
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from stmdf_ad.services.image_service import Image
from stmdf_ad.services.pgm_service import load_image

DATA_DIR = Path(__file__).parent / "data"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size reproduction runs on the 512x512 Lena image")


def smooth_image(size: int = 64, seed: int = 0, low: float = 40.0, high: float = 215.0) -> Image:
    """Smooth random field with no extreme gray levels"""
    rng = np.random.default_rng(seed)
    field = gaussian_filter(rng.random((size, size)), sigma=size / 12.0)
    field = (field - field.min()) / max(field.max() - field.min(), 1e-12)
    return Image(low + (high - low) * field)


@pytest.fixture
def clean_image() -> Image:
    return smooth_image(64, seed=3)


@pytest.fixture
def flat_with_impulse() -> Image:
    pixels = np.full((5, 5), 128.0)
    pixels[2, 2] = 255.0
    return Image(pixels)


@pytest.fixture
def half_black_white() -> Image:
    pixels = np.zeros((4, 4))
    pixels[:, 2:] = 255.0
    return Image(pixels)


@pytest.fixture(scope="session")
def lena() -> Image:
    candidate = os.environ.get("LENA_PGM") or str(DATA_DIR / "lena.pgm")
    if not Path(candidate).is_file():
        pytest.skip(f"canonical Lena not available at {candidate}; set LENA_PGM to enable")
    img = load_image(candidate)
    if img.shape != (512, 512):
        pytest.skip(f"expected a 512x512 Lena, got {img.width}x{img.height}")
    return img
