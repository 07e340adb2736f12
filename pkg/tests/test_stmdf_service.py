"""
Test script for the Switching Trimmed Mean Deviation Filter Service
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from conftest import smooth_image
from stmdf_ad.exceptions import InvalidParameterError
from stmdf_ad.services.image_service import Image, Window, window_at
from stmdf_ad.services.stmdf_service import (
    TrimSpec,
    deviations,
    median_trim_fraction,
    stmdf_filter,
    trim_count,
    trimmed_mean,
    trimmed_mean_stack,
)

windows = st.lists(st.floats(0.0, 255.0, allow_nan=False), min_size=9, max_size=9)
legal_trims = st.sampled_from([0.0, 1 / 9, 0.2, 0.25, 1 / 3, 0.4, 4 / 9])


def oracle_trimmed_mean(samples, m):
    ordered = sorted(samples)
    kept = ordered[m:len(ordered) - m]
    return sum(kept) / len(kept)


def test_trimmed_mean_cases():
    assert trimmed_mean(range(1, 10), 0.0) == 5.0
    assert trimmed_mean([0, 0, 0, 10, 20, 30, 255, 255, 255], 1 / 3) == 20.0
    assert trimmed_mean([128] * 9, 0.4) == 128.0


def test_trim_count_guards():
    assert trim_count(1 / 3, 9) == 3
    with pytest.raises(InvalidParameterError):
        trim_count(0.5, 9)
    with pytest.raises(InvalidParameterError):
        trimmed_mean([], 0.0)


def test_trim_spec_validation():
    assert TrimSpec().trimmed == 3
    with pytest.raises(ValidationError):
        TrimSpec(window_size=4)
    with pytest.raises(ValidationError):
        TrimSpec(trim_fraction=0.5)


def test_median_trim_keeps_only_median():
    assert median_trim_fraction(3) == 4 / 9
    assert TrimSpec(trim_fraction=median_trim_fraction(5), window_size=5).trimmed == 12
    assert trimmed_mean([9, 1, 8, 2, 7, 3, 6, 4, 5], median_trim_fraction(3)) == 5.0


def test_trimmed_mean_oracle_ten_thousand_windows():
    """Test agreement with a brute-force sort-trim-average oracle"""
    rng = np.random.default_rng(2024)
    stack = rng.random((10_000, 9)) * 255.0
    for trim in (0.0, 1 / 3, 4 / 9):
        m = trim_count(trim, 9)
        vectorized = trimmed_mean_stack(stack, trim)
        for row, value in zip(stack, vectorized):
            assert abs(value - oracle_trimmed_mean(row.tolist(), m)) <= 1e-12


@given(windows, legal_trims)
def test_trimmed_mean_within_sample_range(samples, trim):
    value = trimmed_mean(samples, trim)
    assert min(samples) - 1e-9 <= value <= max(samples) + 1e-9


@given(windows, legal_trims, st.floats(-100.0, 100.0))
def test_trimmed_mean_translation(samples, trim, c):
    shifted = trimmed_mean([s + c for s in samples], trim)
    assert shifted == pytest.approx(trimmed_mean(samples, trim) + c, abs=1e-9)


def test_deviation_cases():
    constant = deviations(Window(np.full(9, 128.0), 128.0), 1 / 3)
    assert constant.ctmd == 0.0
    assert not np.any(constant.deviation_vector)

    samples = np.array([0, 0, 0, 10, 255, 20, 30, 255, 255], dtype=float)
    win = Window(samples, center_value=samples[4])
    dev = deviations(win, 1 / 3)
    assert dev.trimmed_mean == 20.0
    assert dev.ctmd == -235.0
    assert np.array_equal(dev.tmad, np.abs(dev.deviation_vector))
    assert dev.deviation_vector.tolist() == (20.0 - samples).tolist()

    pepper = deviations(Window(np.zeros(9), 0.0), 0.25)
    assert (pepper.trimmed_mean, pepper.ctmd) == (0.0, 0.0)


def test_filter_constant_and_infinite_threshold(clean_image):
    flat = Image.constant(6, 6, 90)
    assert stmdf_filter(flat, TrimSpec(), 0.0) == flat
    assert stmdf_filter(clean_image, TrimSpec(), float("inf")) == clean_image


def test_filter_replaces_isolated_impulse(flat_with_impulse):
    out = stmdf_filter(flat_with_impulse, TrimSpec(trim_fraction=1 / 3), 10.0)
    expected = np.full((5, 5), 128.0)
    assert np.array_equal(out.pixels, expected)


def test_filter_negative_threshold_replaces_everything():
    img = smooth_image(16, seed=5)
    out = stmdf_filter(img, TrimSpec(), -1.0)
    for y in range(img.height):
        for x in range(img.width):
            assert out.at(x, y) == pytest.approx(trimmed_mean(window_at(img, x, y).samples, 1 / 3), abs=1e-12)


def test_filter_rejects_nan_threshold(clean_image):
    with pytest.raises(InvalidParameterError):
        stmdf_filter(clean_image, TrimSpec(), float("nan"))
