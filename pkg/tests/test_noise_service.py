"""
Test script for Noise Injection Service
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from conftest import smooth_image
from stmdf_ad.exceptions import CorruptFileError
from stmdf_ad.services.image_service import Image
from stmdf_ad.services.noise_service import (
    NoiseMask,
    NoiseSpec,
    density_seed,
    inject_salt_pepper,
    read_mask,
    write_mask,
)


def test_noise_spec_validation():
    """Test the fixed-value model constraints"""
    with pytest.raises(ValidationError, match="density out of range"):
        NoiseSpec(density=1.2)
    with pytest.raises(ValidationError):
        NoiseSpec(density=0.5, salt_value=200)
    with pytest.raises(ValidationError):
        NoiseSpec(density=0.5, pepper_value=10)
    with pytest.raises(ValidationError):
        NoiseSpec(density=0.5, seed=-1)
    with pytest.raises(ValidationError):
        NoiseSpec(density=0.5, seed=2 ** 64)
    assert NoiseSpec(density=0.5, seed=2 ** 64 - 1).seed == 2 ** 64 - 1
    assert NoiseSpec(density=0.95).density == 0.95


def test_density_zero_is_identity(clean_image):
    noisy, mask = inject_salt_pepper(clean_image, NoiseSpec(density=0.0, seed=3))
    assert noisy == clean_image
    assert mask.count == 0


def test_density_one_corrupts_everything(clean_image):
    noisy, mask = inject_salt_pepper(clean_image, NoiseSpec(density=1.0, seed=3))
    assert set(np.unique(noisy.pixels).tolist()) <= {0.0, 255.0}
    assert mask.count == clean_image.size


def test_binomial_concentration_and_split():
    """Test corruption count and salt:pepper balance at 50% on 512x512"""
    clean = Image.constant(512, 512, 100)
    noisy, mask = inject_salt_pepper(clean, NoiseSpec(density=0.5, seed=1))
    n = clean.size
    sigma = math.sqrt(0.25 * n)
    assert abs(mask.count - 0.5 * n) <= 4 * sigma

    salt = int(np.count_nonzero(noisy.pixels == 255))
    pepper = int(np.count_nonzero(noisy.pixels == 0))
    assert salt + pepper == mask.count
    half_sigma = math.sqrt(mask.count * 0.25)
    assert abs(salt - mask.count / 2) <= 4 * half_sigma


def test_injection_is_deterministic_and_local(clean_image):
    spec = NoiseSpec(density=0.3, seed=42)
    first, mask_a = inject_salt_pepper(clean_image, spec)
    second, mask_b = inject_salt_pepper(clean_image, spec)
    assert first == second
    assert mask_a == mask_b
    untouched = ~mask_a.flags
    assert np.array_equal(first.pixels[untouched], clean_image.pixels[untouched])


def test_density_seed():
    assert density_seed(0, 0.1) == 100
    assert density_seed(7, 0.95) == 957
    assert density_seed(7, 0.0005) == 8


def test_mask_packing():
    """Test that (T, F, F, T) packs to 0b1001_0000"""
    mask = NoiseMask(width=2, height=2, flags=[True, False, False, True])
    assert write_mask(mask) == b"MASK 2 2\n" + bytes([0b1001_0000])


def test_mask_truncated_payload():
    with pytest.raises(CorruptFileError):
        read_mask(b"MASK 4 4\n" + bytes([0xFF]))
    with pytest.raises(CorruptFileError):
        read_mask(b"MSK 1 1\n\x00")


@given(st.integers(1, 20), st.integers(1, 20), st.data())
def test_mask_roundtrip(width, height, data):
    flags = data.draw(st.lists(st.booleans(), min_size=width * height, max_size=width * height))
    mask = NoiseMask(width=width, height=height, flags=flags)
    assert read_mask(write_mask(mask)) == mask


def test_mae_grows_with_density():
    """Test that corruption error rises with density on a fixed seed family"""
    clean = smooth_image(96, seed=4)
    maes = []
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        noisy, _ = inject_salt_pepper(clean, NoiseSpec(density=p, seed=density_seed(11, p)))
        maes.append(float(np.mean(np.abs(noisy.pixels - clean.pixels))))
    assert maes == sorted(maes)
