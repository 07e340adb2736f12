"""
Anisotropic Diffusion Service for the STMDF-AD denoiser
Perona-Malik edge-stopping functions, the 4-neighbour divergence and the
source-boosted STMDF-AD / MF-AD iterations with their driver loop
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.ndimage import median_filter

from stmdf_ad.exceptions import InvalidParameterError
from stmdf_ad.services.image_service import MAX_GRAY, Image, clamp_image, mean_abs_change, padded
from stmdf_ad.services.pgm_service import CsvTable
from stmdf_ad.services.stats_service import entropy_threshold, kappa_or_fallback
from stmdf_ad.services.stmdf_service import TrimSpec, stmdf_filter
from stmdf_ad.services.tvr_service import TvrParams, tvr_stmdf_step

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class CoefficientKind(Enum):
    """Edge-stopping functions D(s)"""
    GAUSSIAN = "gaussian"
    CAUCHY = "cauchy"
    TUKEY = "tukey"


class FilterVariant(Enum):
    """Filters available to run_filter"""
    STMDF_AD = "stmdf-ad"
    MF_AD = "mf-ad"
    MEDIAN = "median"
    STMDF_ONLY = "stmdf-only"
    TVR_STMDF = "tvr-stmdf"


class TauPolicy(Enum):
    FIXED = "fixed"          # computed once from the noisy input
    REFRESH = "refresh"      # recomputed from every iterate


class KappaPolicy(Enum):
    REFRESH = "refresh"
    FIXED = "fixed"


class DiffusionParams(BaseModel):
    """Tunables of the boosted diffusion iterations"""
    source_strength: float = Field(0.25, ge=0.0, le=1.0, description="Source weight beta = alpha/4")
    coefficient: CoefficientKind = Field(CoefficientKind.CAUCHY, description="Edge-stopping function")
    trim: TrimSpec = Field(default_factory=TrimSpec, description="STMDF trimmed-mean estimator")
    max_iterations: int = Field(50, ge=1, description="Iteration cap")
    stop_tolerance: float = Field(0.05, ge=0.0, description="Mean absolute change per pixel (gray levels)")
    tau_policy: TauPolicy = Field(TauPolicy.FIXED, description="When tau is computed")
    kappa_policy: KappaPolicy = Field(KappaPolicy.REFRESH, description="When kappa is computed")
    clamp_tau: bool = Field(False, description="Clamp tau at zero")


@dataclass
class RunTrace:
    """Per-iteration record of a filter run"""
    iterations_executed: int = 0
    changes: List[float] = field(default_factory=list)
    tau: Optional[float] = None
    kappa: Optional[float] = None

    def record(self, change: float) -> None:
        self.changes.append(change)
        self.iterations_executed = len(self.changes)

    def to_csv_table(self) -> CsvTable:
        return CsvTable(
            header=["iteration", "mean_abs_change"],
            rows=[(i + 1, c) for i, c in enumerate(self.changes)],
        )


def diffusion_coefficient(s: ArrayLike, kappa: float, kind: CoefficientKind) -> ArrayLike:
    """D(s) for gradient magnitude s >= 0; always in [0, 1] with D(0) = 1"""
    kind = CoefficientKind(kind)
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be positive, got {kappa}")
    ratio_sq = (np.asarray(s, dtype=np.float64) / kappa) ** 2

    if kind is CoefficientKind.GAUSSIAN:
        d = np.exp(-ratio_sq)
    elif kind is CoefficientKind.CAUCHY:
        d = 1.0 / (1.0 + ratio_sq)
    elif kind is CoefficientKind.TUKEY:
        d = np.where(ratio_sq <= 1.0, (1.0 - ratio_sq) ** 2, 0.0)
    else:
        raise InvalidParameterError(f"unknown diffusion coefficient {kind}")

    return float(d) if np.ndim(d) == 0 else d


def pm_divergence(img: Image, kappa: float, kind: CoefficientKind) -> np.ndarray:
    """sum over N, S, E, W of D(|grad_d|) * grad_d with replicate padding"""
    p = padded(img, 1)
    center = p[1:-1, 1:-1]
    total = np.zeros_like(center)
    for neighbour in (p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, 2:], p[1:-1, :-2]):
        grad = neighbour - center
        total += diffusion_coefficient(np.abs(grad), kappa, kind) * grad
    return total


def median3(img: Image) -> Image:
    """3x3 median, replicate padding, non-recursive"""
    return img.with_pixels(median_filter(img.pixels, size=3, mode="nearest"))


def stmdf_ad_update(img: Image, source: Image, kappa: float, kind: CoefficientKind,
                    beta: float) -> np.ndarray:
    """
    Unclamped explicit update with dt = 1/4:
    (1 - beta) U + div(D grad U) / 4 + beta f, evaluated as U + div/4 + beta (f - U).
    """
    u = img.pixels
    return u + pm_divergence(img, kappa, kind) / 4.0 + beta * (source.pixels - u)


def stmdf_ad_step(img: Image, params: DiffusionParams, tau: float, kappa: float) -> Image:
    source = stmdf_filter(img, params.trim, tau)
    return clamp_image(stmdf_ad_update(img, source, kappa, params.coefficient, params.source_strength))


def mf_ad_step(img: Image, beta: float, kappa: float, kind: CoefficientKind) -> Image:
    if not 0.0 <= beta <= 1.0:
        raise InvalidParameterError(f"source strength must lie in [0, 1], got {beta}")
    return clamp_image(stmdf_ad_update(img, median3(img), kappa, kind, beta))


def gray_level_kappa(img: Image) -> float:
    """
    Diffusion threshold for gray-level gradients. mean/std is dimensionless, so it
    is applied to unit-intensity gradients: D(s / 255; mean/std) == D(s; 255 * mean/std).
    """
    return MAX_GRAY * kappa_or_fallback(img)


def _threshold(img: Image, params: DiffusionParams) -> float:
    tau = entropy_threshold(img)
    if params.clamp_tau and tau < 0:
        return 0.0
    if tau < 0:
        logger.warning(f"Negative entropy threshold tau={tau:.4f}: every pixel will be replaced")
    return tau


def run_filter(img: Image, variant: FilterVariant, params: Optional[DiffusionParams] = None,
               tvr_params: Optional[TvrParams] = None) -> Tuple[Image, RunTrace]:
    """
    Iterate the chosen operator until max_iterations or until the mean
    absolute per-pixel change falls below stop_tolerance.
    """
    params = params or DiffusionParams()
    variant = FilterVariant(variant)
    trace = RunTrace()

    max_iterations, tolerance = params.max_iterations, params.stop_tolerance
    if variant is FilterVariant.TVR_STMDF:
        tvr_params = tvr_params or TvrParams()
        max_iterations, tolerance = tvr_params.max_iterations, tvr_params.stop_tolerance

    uses_tau = variant in (FilterVariant.STMDF_AD, FilterVariant.STMDF_ONLY, FilterVariant.TVR_STMDF)
    uses_kappa = variant in (FilterVariant.STMDF_AD, FilterVariant.MF_AD)

    tau = _threshold(img, params) if uses_tau else None
    kappa = gray_level_kappa(img) if uses_kappa else None

    current = img
    for iteration in range(1, max_iterations + 1):
        if uses_tau and params.tau_policy is TauPolicy.REFRESH and iteration > 1:
            tau = _threshold(current, params)
        if uses_kappa and params.kappa_policy is KappaPolicy.REFRESH and iteration > 1:
            kappa = gray_level_kappa(current)

        if variant is FilterVariant.STMDF_AD:
            nxt = stmdf_ad_step(current, params, tau, kappa)
        elif variant is FilterVariant.MF_AD:
            nxt = mf_ad_step(current, params.source_strength, kappa, params.coefficient)
        elif variant is FilterVariant.MEDIAN:
            nxt = median3(current)
        elif variant is FilterVariant.STMDF_ONLY:
            nxt = stmdf_filter(current, params.trim, tau)
        else:
            nxt = tvr_stmdf_step(current, tvr_params, tau=tau)

        change = mean_abs_change(current, nxt)
        trace.record(change)
        current = nxt
        logger.debug(f"{variant.value} iteration {iteration}: mean |change| = {change:.6f}")
        if change < tolerance:
            break

    trace.tau, trace.kappa = tau, kappa
    kappa_text = "n/a" if kappa is None else f"{kappa:.4f}"
    tau_text = "n/a" if tau is None else f"{tau:.4f}"
    logger.info(
        f"{variant.value}: {trace.iterations_executed} iterations, tau={tau_text}, kappa={kappa_text}"
    )
    return current, trace

