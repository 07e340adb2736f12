"""
Test script for the Total Variation Regularized STMDF Service
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError
from scipy.ndimage import gaussian_filter

from stmdf_ad.services.image_service import Image
from stmdf_ad.services.stmdf_service import TrimSpec
from stmdf_ad.services.tvr_service import TvrParams, total_variation, tv_curvature, tvr_stmdf_step


def test_params_defaults_and_alias():
    params = TvrParams()
    assert params.trim.window_size == 7
    assert params.max_iterations == 200
    assert TvrParams(**{"lambda": 0.3}).lambda_ == 0.3


def test_curvature_constant_is_zero():
    assert not np.any(tv_curvature(Image.constant(5, 5, 80), 1e-3))


def test_curvature_linear_ramp_interior_is_zero():
    y, x = np.mgrid[0:7, 0:7]
    ramp = Image(10.0 + 3.0 * x + 2.0 * y)
    assert np.allclose(tv_curvature(ramp, 1e-3)[1:-1, 1:-1], 0.0, atol=1e-12)


def test_curvature_parabola_interior():
    """Test U = x^2 against the stencil evaluated by hand"""
    eps = 1e-3
    x = np.tile(np.arange(5, dtype=float), (5, 1))
    curv = tv_curvature(Image(x ** 2), eps)
    for col in range(1, 4):
        ux = ((col + 1) ** 2 - (col - 1) ** 2) / 2.0
        expected = (eps ** 2 * 2.0) / (ux ** 2 + eps ** 2) ** 1.5
        assert curv[2, col] == pytest.approx(expected, rel=1e-9)


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 100.0))
def test_curvature_shift_invariant(seed, c):
    rng = np.random.default_rng(seed)
    base = rng.random((9, 9)) * 150.0
    shifted = tv_curvature(Image(base + c), 0.5)
    assert np.allclose(shifted, tv_curvature(Image(base), 0.5), atol=1e-6)


def test_time_step_must_be_positive():
    with pytest.raises(ValidationError):
        TvrParams(dt=0.0)
    with pytest.raises(ValidationError):
        TvrParams(epsilon=0.0)


def test_constant_fixpoint_requires_no_source():
    img = Image.constant(9, 9, 100)
    assert tvr_stmdf_step(img, TvrParams(source_strength=0.0)) == img
    assert tvr_stmdf_step(img, TvrParams()).at(4, 4) > 100.0


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_pure_tv_flow_does_not_increase_variation(seed):
    """Test that a plain TV step does not raise total variation on a smooth field"""
    rng = np.random.default_rng(seed)
    field = gaussian_filter(rng.random((32, 32)), sigma=3.0)
    field = 100.0 + 20.0 * (field - field.mean()) / field.std()
    img = Image(np.clip(field, 0.0, 255.0))
    params = TvrParams(epsilon=10.0, lambda_=0.0, source_strength=0.0, dt=0.1,
                       trim=TrimSpec(window_size=3))
    out = tvr_stmdf_step(img, params, tau=float("inf"))
    assert total_variation(out) <= total_variation(img) + 1e-9
