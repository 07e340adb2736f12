"""
Settings for the STMDF-AD denoiser.

Calibration defaults live here. They can be overridden by a dotenv-format
file passed with --config (keys prefixed STMDF_, e.g. STMDF_BETA=0.3) and by
explicit command-line flags, which take precedence over the file.
The process environment is deliberately not consulted.
"""

import logging
from pathlib import Path
from typing import Any, Literal, Optional, Tuple, Union

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from stmdf_ad.services.diffusion_service import CoefficientKind, DiffusionParams, KappaPolicy, TauPolicy
from stmdf_ad.services.stmdf_service import DEFAULT_TRIM_FRACTION, TrimSpec, median_trim_fraction
from stmdf_ad.services.tvr_service import TvrParams

logger = logging.getLogger(__name__)

MEDIAN_TRIM = "median"


class DenoiseSettings(BaseSettings):
    """Every tunable of the filters and the CLI"""

    model_config = SettingsConfigDict(env_prefix="STMDF_", extra="ignore", env_file_encoding="utf-8")

    # diffusion
    beta: float = Field(0.25, ge=0.0, le=1.0, description="Source strength of the boosted diffusion")
    coefficient: CoefficientKind = Field(CoefficientKind.CAUCHY, description="Edge-stopping function")
    trim: Union[Literal["median"], float] = Field(DEFAULT_TRIM_FRACTION, description="Trim fraction or 'median'")
    window: int = Field(3, ge=1, description="STMDF window side")
    iters: int = Field(50, ge=1, description="Iteration cap")
    tol: float = Field(0.05, ge=0.0, description="Stop tolerance (mean absolute change)")
    tau_policy: TauPolicy = TauPolicy.FIXED
    kappa_policy: KappaPolicy = KappaPolicy.REFRESH
    clamp_tau: bool = False

    # tvr
    tvr_eps: float = Field(1e-3, gt=0.0)
    tvr_lambda: float = Field(0.1, ge=0.0)
    tvr_alpha: float = Field(0.1, ge=0.0)
    tvr_dt: float = Field(0.2, gt=0.0)
    tvr_window: int = Field(7, ge=1)
    tvr_iters: int = Field(200, ge=1)
    tvr_tol: float = Field(0.05, ge=0.0)

    # runtime
    seed: int = Field(0, ge=0, lt=2 ** 64, description="Noise seed")
    workers: int = Field(1, ge=1)
    log_level: str = "WARNING"

    @field_validator("trim")
    @classmethod
    def _trim_range(cls, v: Any) -> Any:
        if v == MEDIAN_TRIM:
            return v
        if not 0.0 <= float(v) < 0.5:
            raise ValueError(f"trim fraction must lie in [0, 0.5), got {v}")
        return float(v)

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {v}")
        return level

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type,
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # flags > settings file > defaults; no process environment
        return init_settings, dotenv_settings

    def trim_spec(self, window: int) -> TrimSpec:
        fraction = median_trim_fraction(window) if self.trim == MEDIAN_TRIM else self.trim
        return TrimSpec(trim_fraction=fraction, window_size=window)

    def diffusion_params(self) -> DiffusionParams:
        return DiffusionParams(
            source_strength=self.beta,
            coefficient=self.coefficient,
            trim=self.trim_spec(self.window),
            max_iterations=self.iters,
            stop_tolerance=self.tol,
            tau_policy=self.tau_policy,
            kappa_policy=self.kappa_policy,
            clamp_tau=self.clamp_tau,
        )

    def tvr_params(self) -> TvrParams:
        return TvrParams(
            epsilon=self.tvr_eps,
            lambda_=self.tvr_lambda,
            source_strength=self.tvr_alpha,
            dt=self.tvr_dt,
            trim=self.trim_spec(self.tvr_window),
            max_iterations=self.tvr_iters,
            stop_tolerance=self.tvr_tol,
        )


def get_settings(config_path: Optional[Union[str, Path]] = None, **overrides: Any) -> DenoiseSettings:
    """Build settings from an optional dotenv file plus explicit overrides"""
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise FileNotFoundError(f"settings file not found: {path}")
        logger.info(f"Loading settings from {path}")
        return DenoiseSettings(_env_file=path, **overrides)
    return DenoiseSettings(_env_file=None, **overrides)
