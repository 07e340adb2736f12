"""
Quality Metrics Service for the STMDF-AD denoiser
Full-reference MSE, PSNR, MAE and mean SSIM
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np
from skimage.metrics import structural_similarity

from stmdf_ad.exceptions import InvalidPairError, InvalidSizeError
from stmdf_ad.services.image_service import Image
from stmdf_ad.services.pgm_service import format_number

logger = logging.getLogger(__name__)

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
METRICS_HEADER = ["psnr_db", "mae", "mse", "mssim"]


@dataclass
class MetricsReport:
    """Quality of a test image against its reference"""
    mse: float
    psnr: float
    mae: float
    mssim: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_csv_row(self) -> Tuple[float, float, float, float]:
        return (self.psnr, self.mae, self.mse, self.mssim)

    def format_line(self) -> str:
        values = dict(zip(METRICS_HEADER, self.to_csv_row()))
        return ",".join(f"{name}={format_number(v)}" for name, v in values.items())


def _check_pair(reference: Image, test: Image) -> None:
    if reference.shape != test.shape:
        raise InvalidPairError(
            f"image dimensions differ: {reference.width}x{reference.height} vs {test.width}x{test.height}"
        )


def psnr_from_mse(mse: float) -> float:
    """10 log10(255^2 / mse); +inf when mse == 0"""
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def mssim(reference: Image, test: Image) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5) over the valid region"""
    _check_pair(reference, test)
    if min(reference.width, reference.height) < SSIM_WINDOW:
        raise InvalidSizeError(
            f"MSSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {reference.width}x{reference.height}"
        )
    return float(structural_similarity(
        reference.pixels,
        test.pixels,
        data_range=PEAK,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=SSIM_K1,
        K2=SSIM_K2,
    ))


def compute_metrics(reference: Image, test: Image) -> MetricsReport:
    _check_pair(reference, test)
    diff = reference.pixels - test.pixels
    mse = float(np.mean(diff ** 2))
    mae = float(np.mean(np.abs(diff)))
    report = MetricsReport(mse=mse, psnr=psnr_from_mse(mse), mae=mae, mssim=mssim(reference, test))
    logger.debug(f"Metrics: {report.format_line()}")
    return report
