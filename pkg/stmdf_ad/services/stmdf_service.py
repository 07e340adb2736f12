"""
Switching Trimmed Mean Deviation Filter Service for the STMDF-AD denoiser
Order statistics over local windows and the entropy-gated switching rule
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from stmdf_ad.exceptions import InvalidParameterError
from stmdf_ad.services.image_service import Image, Window, window_stack

logger = logging.getLogger(__name__)

DEFAULT_TRIM_FRACTION = 1.0 / 3.0
DEFAULT_WINDOW_SIZE = 3
# absorbs representation error such as (1/3) * 9 == 2.9999999999999996
_TRIM_EPS = 1e-9


def trim_count(trim_fraction: float, n: int) -> int:
    """m = floor(trim_fraction * n), validated against over-trimming"""
    if n < 1:
        raise InvalidParameterError("trimmed mean of an empty sample set")
    if not 0.0 <= trim_fraction < 0.5:
        raise InvalidParameterError(f"trim fraction must lie in [0, 0.5), got {trim_fraction}")
    m = int(math.floor(trim_fraction * n + _TRIM_EPS))
    if 2 * m >= n:
        raise InvalidParameterError(f"trim fraction {trim_fraction} removes all {n} samples")
    return m


def median_trim_fraction(window_size: int) -> float:
    """Largest legal trim for a k x k window; keeps only the median sample"""
    n = window_size ** 2
    return ((n - 1) // 2) / n


class TrimSpec(BaseModel):
    """Trim fraction and odd window size of the trimmed-mean estimator"""
    trim_fraction: float = Field(DEFAULT_TRIM_FRACTION, ge=0.0, lt=0.5, description="Fraction trimmed from each end")
    window_size: int = Field(DEFAULT_WINDOW_SIZE, ge=1, description="Odd window side k")

    @model_validator(mode="after")
    def _check_window(self) -> "TrimSpec":
        if self.window_size % 2 == 0:
            raise ValueError(f"window size must be odd, got {self.window_size}")
        trim_count(self.trim_fraction, self.window_size ** 2)
        return self

    @property
    def samples_per_window(self) -> int:
        return self.window_size ** 2

    @property
    def trimmed(self) -> int:
        return trim_count(self.trim_fraction, self.samples_per_window)


@dataclass
class DeviationSet:
    """Deviations of a window's samples from its trimmed mean"""
    deviation_vector: np.ndarray
    tmad: np.ndarray
    ctmd: float
    trimmed_mean: float


def trimmed_mean(samples: Sequence[float], trim_fraction: float) -> float:
    """Sort, drop m = floor(trim_fraction * n) from each end, average the rest"""
    values = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    m = trim_count(trim_fraction, values.size)
    return float(np.mean(values[m:values.size - m]))


def trimmed_mean_stack(stack: np.ndarray, trim_fraction: float) -> np.ndarray:
    """Trimmed mean over the last axis of a window stack"""
    n = stack.shape[-1]
    m = trim_count(trim_fraction, n)
    ordered = np.sort(stack, axis=-1)
    return np.mean(ordered[..., m:n - m], axis=-1)


def deviations(win: Window, trim_fraction: float) -> DeviationSet:
    x_hat = trimmed_mean(win.samples, trim_fraction)
    deviation_vector = x_hat - np.asarray(win.samples, dtype=np.float64)
    return DeviationSet(
        deviation_vector=deviation_vector,
        tmad=np.abs(deviation_vector),
        ctmd=x_hat - win.center_value,
        trimmed_mean=x_hat,
    )


def stmdf_filter(img: Image, spec: TrimSpec, tau: float) -> Image:
    """
    Non-recursive switching filter: keep a pixel when |trimmed_mean - centre| <= tau,
    otherwise replace it by the trimmed mean of its window.
    """
    if not math.isfinite(tau) and not (math.isinf(tau) and tau > 0):
        raise InvalidParameterError(f"threshold must be finite, got {tau}")

    x_hat = trimmed_mean_stack(window_stack(img, spec.window_size), spec.trim_fraction)
    ctmd = x_hat - img.pixels
    keep = np.abs(ctmd) <= tau
    out = np.where(keep, img.pixels, x_hat)

    logger.debug(f"STMDF tau={tau:.4f}: replaced {int(np.count_nonzero(~keep))}/{img.size} pixels")
    return img.with_pixels(out)
