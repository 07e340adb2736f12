"""
Command-line interface for the STMDF-AD denoiser.

    python -m stmdf_ad noise    --in clean.pgm --density 0.9 --seed 7 --out noisy.pgm --mask noisy.mask
    python -m stmdf_ad denoise  --in noisy.pgm --variant stmdf-ad --out filtered.pgm --ref clean.pgm
    python -m stmdf_ad metrics  --ref clean.pgm --in filtered.pgm
    python -m stmdf_ad sweep    --in clean.pgm --densities 0.1,0.5,0.9 --variants median,stmdf-ad --out sweep.csv

Exit codes: 0 success, 2 usage/validation, 3 I/O, 4 numeric/degenerate input.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from stmdf_ad import __version__
from stmdf_ad.config import MEDIAN_TRIM, DenoiseSettings, get_settings
from stmdf_ad.exceptions import DenoiseError, InvalidParameterError
from stmdf_ad.services.benchmark_service import run_sweep, sweep_table
from stmdf_ad.services.diffusion_service import CoefficientKind, FilterVariant, KappaPolicy, TauPolicy, run_filter
from stmdf_ad.services.export_service import export_service
from stmdf_ad.services.metrics_service import METRICS_HEADER, compute_metrics
from stmdf_ad.services.noise_service import NoiseSpec, inject_salt_pepper, write_mask
from stmdf_ad.services.pgm_service import CsvTable, format_number, load_image, save_image, write_csv
from stmdf_ad.services.stats_service import STATS_SWEEP_HEADER, stats_sweep_rows

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

# argparse dest -> settings field
SETTINGS_FLAGS = {
    "beta": "beta",
    "coeff": "coefficient",
    "trim": "trim",
    "window": "window",
    "iters": "iters",
    "tol": "tol",
    "tau_policy": "tau_policy",
    "kappa_policy": "kappa_policy",
    "clamp_tau": "clamp_tau",
    "eps": "tvr_eps",
    "lambda_": "tvr_lambda",
    "alpha": "tvr_alpha",
    "dt": "tvr_dt",
    "seed": "seed",
    "workers": "workers",
    "log_level": "log_level",
}
# iteration and window flags also drive the TVR variant when given
SHARED_TVR_FLAGS = {"iters": "tvr_iters", "tol": "tvr_tol", "window": "tvr_window"}


def _trim_value(text: str) -> Union[str, float]:
    if text == MEDIAN_TRIM:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"trim must be a fraction or '{MEDIAN_TRIM}', got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _variant_list(text: str) -> List[FilterVariant]:
    try:
        return [FilterVariant(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError:
        choices = ", ".join(v.value for v in FilterVariant)
        raise argparse.ArgumentTypeError(f"variants must be drawn from {{{choices}}}, got {text!r}")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("general")
    group.add_argument("--config", help="dotenv-format settings file (STMDF_* keys)")
    group.add_argument("--log-level", dest="log_level",
                       choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    group.add_argument("--seed", type=int, help="noise seed")


def _add_filter_flags(parser: argparse.ArgumentParser) -> None:
    diffusion = parser.add_argument_group("diffusion")
    diffusion.add_argument("--beta", type=float, help="source strength in [0, 1]")
    diffusion.add_argument("--coeff", choices=[k.value for k in CoefficientKind], help="edge-stopping function")
    diffusion.add_argument("--trim", type=_trim_value, help="trim fraction in [0, 0.5) or 'median'")
    diffusion.add_argument("--window", type=int, help="odd STMDF window size")
    diffusion.add_argument("--iters", type=int, help="maximum iterations")
    diffusion.add_argument("--tol", type=float, help="stop when mean |change| falls below this")
    diffusion.add_argument("--tau-policy", dest="tau_policy", choices=[p.value for p in TauPolicy])
    diffusion.add_argument("--kappa-policy", dest="kappa_policy", choices=[p.value for p in KappaPolicy])
    diffusion.add_argument("--clamp-tau", dest="clamp_tau", action="store_const", const=True,
                           help="clamp a negative entropy threshold at 0")

    tvr = parser.add_argument_group("tvr-stmdf")
    tvr.add_argument("--eps", type=float, help="gradient regularizer")
    tvr.add_argument("--lambda", dest="lambda_", type=float, help="fidelity weight")
    tvr.add_argument("--alpha", type=float, help="source weight")
    tvr.add_argument("--dt", type=float, help="time step")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stmdf_ad",
        description="Salt-and-pepper noise removal with switching trimmed-mean anisotropic diffusion.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    noise = commands.add_parser("noise", help="inject fixed-value impulse noise")
    noise.add_argument("--in", dest="input", required=True)
    noise.add_argument("--out", required=True)
    noise.add_argument("--mask", help="write the corruption mask here")
    noise.add_argument("--density", type=float, required=True)
    _add_common_flags(noise)

    denoise = commands.add_parser("denoise", help="filter a noisy image")
    denoise.add_argument("--in", dest="input", required=True)
    denoise.add_argument("--out", required=True)
    denoise.add_argument("--variant", choices=[v.value for v in FilterVariant],
                         default=FilterVariant.STMDF_AD.value)
    denoise.add_argument("--ref", help="clean reference; prints a metrics line (images under 11x11 are rejected, MSSIM needs a full window)")
    denoise.add_argument("--trace", help="write the per-iteration trace CSV here")
    _add_common_flags(denoise)
    _add_filter_flags(denoise)

    metrics = commands.add_parser("metrics", help="compare an image against a reference")
    metrics.add_argument("--ref", required=True, help="clean reference, at least 11x11 (MSSIM window)")
    metrics.add_argument("--in", dest="input", required=True)
    _add_common_flags(metrics)

    sweep = commands.add_parser("sweep", help="density x variant benchmark")
    sweep.add_argument("--in", dest="input", required=True, help="clean reference image")
    sweep.add_argument("--densities", type=_float_list, required=True, help="comma-separated, e.g. 0.1,0.5,0.9")
    sweep.add_argument("--variants", type=_variant_list,
                       default=[FilterVariant.MEDIAN, FilterVariant.STMDF_AD])
    sweep.add_argument("--out", required=True, help="sweep CSV")
    sweep.add_argument("--stats-out", dest="stats_out", help="image statistics CSV")
    sweep.add_argument("--svg", help="PSNR chart; a *_stats.svg sibling is written with --stats-out")
    sweep.add_argument("--xlsx", help="Excel workbook of the sweep")
    sweep.add_argument("--report", help="Markdown report of the sweep")
    sweep.add_argument("--workers", type=int, help="parallel sweep cells")
    _add_common_flags(sweep)
    _add_filter_flags(sweep)

    return parser


def load_settings(args: argparse.Namespace) -> DenoiseSettings:
    overrides: Dict[str, Any] = {}
    for dest, name in SETTINGS_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[name] = value
    for dest, name in SHARED_TVR_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[name] = value
    return get_settings(args.config, **overrides)


def _write_bytes(path: Union[str, Path], data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(data)
    logger.info(f"Wrote {path}")


def cmd_noise(args: argparse.Namespace, settings: DenoiseSettings) -> int:
    spec = NoiseSpec(density=args.density, seed=settings.seed)
    clean = load_image(args.input)
    noisy, mask = inject_salt_pepper(clean, spec)
    save_image(args.out, noisy)
    if args.mask:
        _write_bytes(args.mask, write_mask(mask))
    print(f"corrupted_fraction={format_number(mask.fraction)}")
    return EXIT_OK


def cmd_denoise(args: argparse.Namespace, settings: DenoiseSettings) -> int:
    variant = FilterVariant(args.variant)
    params, tvr_params = settings.diffusion_params(), settings.tvr_params()
    reference = load_image(args.ref) if args.ref else None
    noisy = load_image(args.input)

    filtered, trace = run_filter(noisy, variant, params, tvr_params)
    save_image(args.out, filtered)
    if args.trace:
        _write_bytes(args.trace, trace.to_csv_table().to_bytes())
    if reference is not None:
        print(compute_metrics(reference, filtered).format_line())
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace, settings: DenoiseSettings) -> int:
    reference = load_image(args.ref)
    test = load_image(args.input)
    report = compute_metrics(reference, test)
    table = CsvTable(header=list(METRICS_HEADER), rows=[report.to_csv_row()])
    sys.stdout.write(write_csv(table).decode("ascii"))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: DenoiseSettings) -> int:
    if not args.densities:
        raise InvalidParameterError("density list is empty")
    if not args.variants:
        raise InvalidParameterError("variant list is empty")
    for density in args.densities:
        NoiseSpec(density=density)

    clean = load_image(args.input)
    records = run_sweep(
        clean,
        args.densities,
        args.variants,
        params=settings.diffusion_params(),
        tvr_params=settings.tvr_params(),
        seed=settings.seed,
        workers=settings.workers,
    )
    _write_bytes(args.out, sweep_table(records).to_bytes())

    stats_rows = None
    if args.stats_out or args.report:
        stats_rows = stats_sweep_rows(clean, args.densities, settings.seed)
    if args.stats_out:
        stats = CsvTable(header=list(STATS_SWEEP_HEADER), rows=[r.to_row() for r in stats_rows])
        _write_bytes(args.stats_out, stats.to_bytes())

    if args.svg:
        svg_path = Path(args.svg)
        export_service.save_artifact(svg_path, export_service.render_psnr_chart(records))
        if stats_rows:
            stats_svg = svg_path.with_name(f"{svg_path.stem}_stats{svg_path.suffix or '.svg'}")
            export_service.save_artifact(stats_svg, export_service.render_stats_chart(stats_rows))
    if args.xlsx:
        export_service.save_artifact(args.xlsx, export_service.export_sweep_to_excel(records))
    if args.report:
        context = {"parameters": {
            "seed": settings.seed,
            "variants": ",".join(v.value for v in dict.fromkeys(args.variants)),
            **settings.diffusion_params().model_dump(mode="json", exclude={"trim"}),
            "trim_fraction": settings.diffusion_params().trim.trim_fraction,
            "window_size": settings.window,
        }}
        report = export_service.render_sweep_report(records, stats_rows, context)
        export_service.save_artifact(args.report, report)

    logger.info(f"Sweep finished: {len(records)} rows")
    return EXIT_OK


COMMANDS = {
    "noise": cmd_noise,
    "denoise": cmd_denoise,
    "metrics": cmd_metrics,
    "sweep": cmd_sweep,
}


def _fail(message: str, code: int) -> int:
    logger.error(message)
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.WARNING,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        settings = load_settings(args)
        logging.getLogger().setLevel(settings.log_level)
        logger.info(f"Running {args.command}")
        return COMMANDS[args.command](args, settings)
    except ValidationError as e:
        messages = "; ".join(err["msg"] for err in e.errors())
        return _fail(messages, EXIT_USAGE)
    except DenoiseError as e:
        return _fail(str(e), e.exit_code)
    except FileNotFoundError as e:
        return _fail(f"file not found: {e.filename or e}", EXIT_IO)
    except OSError as e:
        return _fail(f"I/O error: {e}", EXIT_IO)


if __name__ == "__main__":
    sys.exit(main())
