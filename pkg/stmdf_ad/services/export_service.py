"""
Data Export Service for the STMDF-AD denoiser
Excel workbooks, Markdown reports and SVG charts for density sweeps
"""

import io
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import xlsxwriter
from jinja2 import Environment, FileSystemLoader
from jinja2.exceptions import TemplateError
from matplotlib.figure import Figure

from stmdf_ad.services.benchmark_service import SWEEP_HEADER, SweepRecord
from stmdf_ad.services.pgm_service import format_number
from stmdf_ad.services.stats_service import STATS_SWEEP_HEADER, StatsSweepRow

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"
REPORT_TEMPLATE = "sweep_report.md.j2"

# sheet name -> MetricsReport attribute
METRIC_SHEETS = {
    "PSNR": "psnr",
    "MAE": "mae",
    "MSE": "mse",
    "MSSIM": "mssim",
}


def pivot(records: Sequence[SweepRecord], metric: str) -> Dict[str, Any]:
    """variants x densities table of one metric"""
    densities = sorted({r.density for r in records})
    variants = sorted({r.variant.value for r in records})
    cells = {(r.variant.value, r.density): getattr(r.metrics, metric) for r in records}
    return {
        "densities": densities,
        "rows": [
            {"variant": v, "values": [cells.get((v, d)) for d in densities]}
            for v in variants
        ],
    }


class ExportService:
    """Service for exporting sweep results to various formats"""

    def __init__(self, templates_dir: Union[str, Path] = TEMPLATES_DIR):
        self.templates_dir = Path(templates_dir)
        self.jinja_env = Environment(
            loader=FileSystemLoader(str(self.templates_dir)),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.jinja_env.filters["num"] = self._number_filter

    @staticmethod
    def _number_filter(value: Any, digits: int = 4) -> str:
        if value is None:
            return "-"
        if isinstance(value, float) and math.isfinite(value):
            return f"{value:.{digits}f}"
        return format_number(value)

    def export_sweep_to_excel(self, records: Sequence[SweepRecord]) -> bytes:
        """One pivot sheet per metric plus the raw sweep rows"""
        buffer = io.BytesIO()

        with xlsxwriter.Workbook(buffer, {"in_memory": True}) as workbook:
            header_format = workbook.add_format({
                "bold": True,
                "font_color": "white",
                "bg_color": "#366092",
                "border": 1,
            })
            label_format = workbook.add_format({
                "bold": True,
                "bg_color": "#D7E4BD",
                "border": 1,
            })
            number_format = workbook.add_format({
                "num_format": "0.0000",
                "border": 1,
            })

            for sheet_name, metric in METRIC_SHEETS.items():
                worksheet = workbook.add_worksheet(sheet_name)
                self._create_pivot_sheet(worksheet, pivot(records, metric), header_format,
                                         label_format, number_format)

            raw_sheet = workbook.add_worksheet("Raw")
            self._create_raw_sheet(raw_sheet, records, header_format, number_format)

        excel_data = buffer.getvalue()
        buffer.close()
        logger.info(f"Built sweep workbook: {len(records)} records, {len(excel_data)} bytes")
        return excel_data

    def _write_value(self, worksheet, row: int, col: int, value: Any, number_format) -> None:
        # xlsx has no representation for inf
        if isinstance(value, float) and not math.isfinite(value):
            worksheet.write_string(row, col, format_number(value), number_format)
        elif value is None:
            worksheet.write_blank(row, col, None, number_format)
        else:
            worksheet.write_number(row, col, value, number_format)

    def _create_pivot_sheet(self, worksheet, table: Dict[str, Any], header_format,
                            label_format, number_format) -> None:
        worksheet.write(0, 0, "variant \\ density", header_format)
        for col, density in enumerate(table["densities"], 1):
            worksheet.write_number(0, col, density, header_format)

        for row, entry in enumerate(table["rows"], 1):
            worksheet.write(row, 0, entry["variant"], label_format)
            for col, value in enumerate(entry["values"], 1):
                self._write_value(worksheet, row, col, value, number_format)

        worksheet.set_column(0, 0, 18)
        worksheet.set_column(1, max(1, len(table["densities"])), 10)

    def _create_raw_sheet(self, worksheet, records: Sequence[SweepRecord], header_format,
                          number_format) -> None:
        for col, header in enumerate(SWEEP_HEADER + ["iterations"]):
            worksheet.write(0, col, header, header_format)

        for row, record in enumerate(records, 1):
            worksheet.write_number(row, 0, record.density, number_format)
            worksheet.write_string(row, 1, record.variant.value)
            for col, value in enumerate(record.metrics.to_csv_row(), 2):
                self._write_value(worksheet, row, col, value, number_format)
            worksheet.write_number(row, len(SWEEP_HEADER), record.iterations)

        worksheet.set_column(0, 0, 10)
        worksheet.set_column(1, 1, 12)
        worksheet.set_column(2, len(SWEEP_HEADER), 12)

    def render_sweep_report(self, records: Sequence[SweepRecord],
                            stats_rows: Optional[Sequence[StatsSweepRow]] = None,
                            context: Optional[Dict[str, Any]] = None) -> str:
        """Markdown report with run parameters, metric pivots and image statistics"""
        template_data = {
            "generated_at": (context or {}).get("generated_at", datetime.now().strftime("%Y-%m-%d %H:%M:%S")),
            "parameters": dict(sorted((context or {}).get("parameters", {}).items())),
            "psnr": pivot(records, "psnr"),
            "mae": pivot(records, "mae"),
            "records": [r.to_dict() for r in records],
            "stats_header": STATS_SWEEP_HEADER + ["tau"],
            "stats_rows": [
                {"density": r.density, **r.stats.to_dict()} for r in (stats_rows or [])
            ],
        }
        try:
            template = self.jinja_env.get_template(REPORT_TEMPLATE)
            return template.render(**template_data)
        except TemplateError as e:
            logger.error(f"Jinja2 template error: {str(e)}")
            raise

    @staticmethod
    def _figure_to_svg(fig: Figure) -> str:
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg")
        return buffer.getvalue().decode("utf-8")

    def render_psnr_chart(self, records: Sequence[SweepRecord]) -> str:
        """PSNR vs density, one line per variant"""
        table = pivot(records, "psnr")
        fig = Figure(figsize=(6, 4), layout="constrained")
        ax = fig.add_subplot(1, 1, 1)
        for entry in table["rows"]:
            # +inf PSNR (perfect restoration) is not plottable
            values = [v if v is not None and math.isfinite(v) else float("nan") for v in entry["values"]]
            ax.plot(table["densities"], values, marker="o", label=entry["variant"])
        ax.set_xlabel("noise density")
        ax.set_ylabel("PSNR (dB)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        return self._figure_to_svg(fig)

    def render_stats_chart(self, stats_rows: Sequence[StatsSweepRow]) -> str:
        """Global image attributes vs noise density"""
        densities = [r.density for r in stats_rows]
        series = {
            "mean": [r.stats.mean for r in stats_rows],
            "std": [r.stats.std for r in stats_rows],
            "entropy": [r.stats.entropy for r in stats_rows],
            "extreme_fraction": [r.stats.extreme_fraction for r in stats_rows],
            "tau": [r.stats.tau for r in stats_rows],
        }
        fig = Figure(figsize=(10, 6), layout="constrained")
        for index, (name, values) in enumerate(series.items(), 1):
            ax = fig.add_subplot(2, 3, index)
            ax.plot(densities, values, marker="o")
            ax.set_title(name)
            ax.set_xlabel("noise density")
            ax.grid(True, alpha=0.3)
        return self._figure_to_svg(fig)

    def save_artifact(self, path: Union[str, Path], data: Union[bytes, str]) -> Path:
        """Save export data to disk and return the file path"""
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode("utf-8")
        with open(file_path, "wb") as f:
            f.write(data)
        logger.info(f"Wrote {file_path}")
        return file_path


export_service = ExportService()
