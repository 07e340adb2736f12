"""
Benchmark Service for the STMDF-AD denoiser
Noise-density x filter-variant sweeps scored against a clean reference
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from stmdf_ad.exceptions import InvalidParameterError
from stmdf_ad.services.diffusion_service import DiffusionParams, FilterVariant, run_filter
from stmdf_ad.services.image_service import Image
from stmdf_ad.services.metrics_service import MetricsReport, compute_metrics
from stmdf_ad.services.noise_service import NoiseSpec, density_seed, inject_salt_pepper
from stmdf_ad.services.pgm_service import CsvTable
from stmdf_ad.services.tvr_service import TvrParams

logger = logging.getLogger(__name__)

SWEEP_HEADER = ["density", "variant", "psnr_db", "mae", "mse", "mssim"]


@dataclass
class SweepRecord:
    """One (density, variant) cell of a sweep"""
    density: float
    variant: FilterVariant
    metrics: MetricsReport
    iterations: int

    @property
    def sort_key(self) -> Tuple[float, str]:
        return (self.density, self.variant.value)

    def to_row(self) -> Tuple[Any, ...]:
        return (self.density, self.variant.value, *self.metrics.to_csv_row())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "density": self.density,
            "variant": self.variant.value,
            "iterations": self.iterations,
            **self.metrics.to_dict(),
        }


def _run_cell(clean: Image, noisy: Image, density: float, variant: FilterVariant,
              params: DiffusionParams, tvr_params: TvrParams) -> SweepRecord:
    filtered, trace = run_filter(noisy, variant, params, tvr_params)
    metrics = compute_metrics(clean, filtered)
    logger.info(f"density={density} variant={variant.value} psnr={metrics.psnr:.4f} dB")
    return SweepRecord(density=density, variant=variant, metrics=metrics,
                       iterations=trace.iterations_executed)


def run_sweep(clean: Image, densities: Sequence[float], variants: Sequence[FilterVariant],
              params: Optional[DiffusionParams] = None, tvr_params: Optional[TvrParams] = None,
              seed: int = 0, workers: int = 1) -> List[SweepRecord]:
    """
    Inject each density with its derived seed, filter with every variant and score.
    Cells may run concurrently; the result is sorted by (density, variant).
    """
    if not densities:
        raise InvalidParameterError("density list is empty")
    if not variants:
        raise InvalidParameterError("variant list is empty")
    if workers < 1:
        raise InvalidParameterError(f"workers must be >= 1, got {workers}")

    params = params or DiffusionParams()
    tvr_params = tvr_params or TvrParams()
    variants = [FilterVariant(v) for v in dict.fromkeys(variants)]

    noisy_images = {}
    for density in dict.fromkeys(densities):
        spec = NoiseSpec(density=density, seed=density_seed(seed, density))
        noisy_images[density], _ = inject_salt_pepper(clean, spec)

    cells = [(d, v) for d in noisy_images for v in variants]
    logger.info(f"Sweep: {len(noisy_images)} densities x {len(variants)} variants on {workers} worker(s)")

    if workers == 1:
        records = [_run_cell(clean, noisy_images[d], d, v, params, tvr_params) for d, v in cells]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_cell, clean, noisy_images[d], d, v, params, tvr_params)
                for d, v in cells
            ]
            records = [f.result() for f in futures]

    return sorted(records, key=lambda r: r.sort_key)


def sweep_table(records: Sequence[SweepRecord]) -> CsvTable:
    return CsvTable(header=list(SWEEP_HEADER), rows=[r.to_row() for r in records])
