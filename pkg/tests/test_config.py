"""
Test script for settings loading
"""

import pytest
from pydantic import ValidationError

from stmdf_ad.config import DenoiseSettings, get_settings
from stmdf_ad.services.diffusion_service import CoefficientKind, TauPolicy


def test_defaults():
    settings = get_settings()
    params = settings.diffusion_params()
    assert params.source_strength == 0.25
    assert params.coefficient is CoefficientKind.CAUCHY
    assert params.trim.trimmed == 3
    assert params.max_iterations == 50
    tvr = settings.tvr_params()
    assert tvr.trim.window_size == 7
    assert tvr.max_iterations == 200
    assert settings.log_level == "WARNING"


def test_settings_file_and_override_precedence(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("STMDF_BETA=0.4\nSTMDF_COEFFICIENT=tukey\nSTMDF_ITERS=9\nSTMDF_TAU_POLICY=refresh\n")
    settings = get_settings(path, iters=3)
    assert settings.beta == 0.4
    assert settings.coefficient is CoefficientKind.TUKEY
    assert settings.tau_policy is TauPolicy.REFRESH
    assert settings.iters == 3


def test_process_environment_is_ignored(monkeypatch):
    monkeypatch.setenv("STMDF_BETA", "0.9")
    assert get_settings().beta == 0.25


def test_median_trim_alias():
    settings = get_settings(trim="median", window=5, tvr_window=3)
    assert settings.diffusion_params().trim.trimmed == 12
    assert settings.tvr_params().trim.trimmed == 4


def test_invalid_values():
    with pytest.raises(ValidationError):
        DenoiseSettings(beta=1.5)
    with pytest.raises(ValidationError):
        DenoiseSettings(trim=0.6)
    with pytest.raises(ValidationError):
        DenoiseSettings(log_level="chatty")
    with pytest.raises(ValidationError):
        get_settings(window=4).diffusion_params()
    with pytest.raises(FileNotFoundError):
        get_settings("/nonexistent/run.env")
