"""
Image Statistics Service for the STMDF-AD denoiser
Global mean/std, histogram entropy, the entropy-guided threshold tau,
the diffusion threshold kappa and impulse-density estimation
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from stmdf_ad.exceptions import DegenerateImageError, InvalidParameterError
from stmdf_ad.services.image_service import Image, round_half_away
from stmdf_ad.services.noise_service import NoiseSpec, density_seed, inject_salt_pepper
from stmdf_ad.services.pgm_service import CsvTable

logger = logging.getLogger(__name__)

HISTOGRAM_BINS = 256
KAPPA_FALLBACK = 1.0
STATS_SWEEP_HEADER = ["density", "mean", "std", "entropy", "extreme_fraction"]


@dataclass
class ImageStats:
    """Global image attributes used for thresholds and density analysis"""
    mean: float
    std: float
    entropy: float
    extreme_fraction: float

    @property
    def tau(self) -> float:
        return (self.mean - self.std) * self.entropy

    def to_dict(self) -> Dict[str, Any]:
        return {**asdict(self), "tau": self.tau}


@dataclass
class StatsSweepRow:
    density: float
    stats: ImageStats

    def to_row(self) -> Tuple[float, ...]:
        s = self.stats
        return (self.density, s.mean, s.std, s.entropy, s.extreme_fraction)


def _quantized(img: Image) -> np.ndarray:
    return np.clip(round_half_away(img.pixels), 0, HISTOGRAM_BINS - 1).astype(np.int64)


def histogram(img: Image) -> np.ndarray:
    return np.bincount(_quantized(img).ravel(), minlength=HISTOGRAM_BINS)


def image_entropy(img: Image) -> float:
    """Shannon entropy in bits of the 256-bin gray-level histogram"""
    p = histogram(img).astype(np.float64) / img.size
    p = p[p > 0]
    return float(np.sum(-p * np.log2(p)))


def global_mean_std(img: Image) -> Tuple[float, float]:
    """Arithmetic mean and population (divide-by-MN) standard deviation"""
    values = img.pixels
    mean = float(np.mean(values))
    std = float(np.sqrt(np.mean((values - mean) ** 2)))
    return mean, std


def entropy_threshold(img: Image) -> float:
    """tau = (mean - std) * entropy; not clamped, may be negative"""
    mean, std = global_mean_std(img)
    return (mean - std) * image_entropy(img)


def diffusion_kappa(img: Image) -> float:
    """kappa = mean / std of the given iterate"""
    mean, std = global_mean_std(img)
    if std == 0:
        raise DegenerateImageError("zero standard deviation, kappa undefined")
    return mean / std


def kappa_or_fallback(img: Image) -> float:
    try:
        return diffusion_kappa(img)
    except DegenerateImageError:
        logger.warning(f"Degenerate image (std = 0), using kappa fallback {KAPPA_FALLBACK}")
        return KAPPA_FALLBACK


def estimate_noise_density(img: Image) -> float:
    """Fraction of pixels quantized to 0 or 255"""
    q = _quantized(img)
    extreme = np.count_nonzero(q == 0) + np.count_nonzero(q == HISTOGRAM_BINS - 1)
    return extreme / img.size


def image_stats(img: Image) -> ImageStats:
    mean, std = global_mean_std(img)
    return ImageStats(
        mean=mean,
        std=std,
        entropy=image_entropy(img),
        extreme_fraction=estimate_noise_density(img),
    )


def stats_sweep_rows(img: Image, densities: Sequence[float], seed: int) -> List[StatsSweepRow]:
    rows = []
    for density in densities:
        if not 0.0 <= density <= 1.0:
            raise InvalidParameterError(f"density out of range: {density}")
        spec = NoiseSpec(density=density, seed=density_seed(seed, density))
        noisy, _ = inject_salt_pepper(img, spec)
        stats = image_stats(noisy)
        logger.debug(f"density={density} entropy={stats.entropy:.4f} extreme={stats.extreme_fraction:.4f}")
        rows.append(StatsSweepRow(density=density, stats=stats))
    return rows


def stats_sweep(img: Image, densities: Sequence[float], seed: int) -> CsvTable:
    """Noise-density sweep of the global image attributes"""
    rows = stats_sweep_rows(img, densities, seed)
    return CsvTable(header=list(STATS_SWEEP_HEADER), rows=[r.to_row() for r in rows])
