"""Command-line entry point for the gasket energy toolkit."""

import argparse
import logging
import sys
import time
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .models.errors import ConfigError, GasketError
from .models.run_config import BACKENDS, FORMATS, KINDS, MEASURES, RANGES, RunConfig
from .models.word import Word
from .services.energy_model import EnergyModel, polar_arrays
from .services.histogram_service import HistogramService
from .services.montecarlo import MonteCarloService
from .services.structure_builder import StructureBuilder, structure_summary
from .services.theorem_verifier import TheoremVerifier
from .services.word_enumerator import EnumerationProgress, WordEnumerator, WordMeasure
from .utils.output import build_metadata, render_csv, render_json, write_output

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def create_progress_bar(current: int, total: int, width: int = 40) -> str:
    """Create an ASCII progress bar.

    Args:
        current: Current progress value
        total: Total value
        width: Width of the bar in characters

    Returns:
        Progress bar string like [####----] 50%
    """
    if total == 0:
        return f"[{'-' * width}] 0%"

    percentage = current / total
    filled = int(width * percentage)
    empty = width - filled

    return f"[{'#' * filled}{'-' * empty}] {int(percentage * 100)}%"


def print_progress(progress: EnumerationProgress) -> None:
    """Print enumeration progress on a single stderr line."""
    bar = create_progress_bar(progress.partitions_done, progress.partitions_total, 30)
    status = f"\r{bar} {progress.leaves_done}/{progress.leaves_total} words"
    sys.stderr.write(status)
    if progress.partitions_done == progress.partitions_total:
        sys.stderr.write("\n")
    sys.stderr.flush()


def print_chunk_progress(done: int, total: int) -> None:
    bar = create_progress_bar(done, total, 30)
    sys.stderr.write(f"\r{bar} {done}/{total} chunks")
    if done == total:
        sys.stderr.write("\n")
    sys.stderr.flush()


def _progress_enabled() -> bool:
    return sys.stderr.isatty()


# ----------------------------------------------------------------------
# Argument parsing
# ----------------------------------------------------------------------


def _global_options() -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand.

    Defaults are suppressed so a subcommand parser never overwrites a value
    given before the subcommand name.
    """
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="debug logging")
    parent.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="warnings and errors only")
    parent.add_argument("--config", default=argparse.SUPPRESS, metavar="PATH",
                        help="JSON file with run configuration")
    parent.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads (default: all logical CPUs)")
    parent.add_argument("--timing", action="store_true", default=argparse.SUPPRESS,
                        help="record wall time in the output")
    parent.add_argument("--allow-deep", dest="allow_deep", action="store_true",
                        default=argparse.SUPPRESS, help="enumerate beyond the leaf cap")
    return parent


def _structure_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--level", type=int, help="gasket level l >= 2")
    parent.add_argument("--backend", choices=BACKENDS)
    parent.add_argument("--exact-cap", dest="exact_cap", type=int,
                        help="largest level built with exact rationals")
    parent.add_argument("--certify-cap", dest="certify_cap", type=int,
                        help="largest level with exact determinant certificates")
    parent.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    parent.add_argument("--format", choices=FORMATS)
    return parent


def _measure_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--measure", choices=MEASURES)
    parent.add_argument("--weights", help="product measure probabilities, e.g. 0.5,0.25,0.25")
    return parent


def build_parser() -> argparse.ArgumentParser:
    global_options = _global_options()
    structure_options = _structure_options()
    measure_options = _measure_options()

    parser = argparse.ArgumentParser(
        prog="gasket-energy",
        description="Harmonic structures, energy measures and b-coefficients on SG_l.",
        parents=[global_options],
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    subparsers.add_parser(
        "structure",
        parents=[global_options, structure_options],
        help="build (D, r) and the extension matrices",
    )

    coeffs = subparsers.add_parser(
        "coeffs", parents=[global_options, structure_options], help="a, b and polar data of one word"
    )
    coeffs.add_argument("--word", help="symbols, e.g. 1,2,3 (empty string for the empty word)")
    coeffs.add_argument("--f", help="boundary values v1,v2,v3 for energy_f columns")

    verify = subparsers.add_parser(
        "verify", parents=[global_options, structure_options], help="run property checks"
    )
    verify.add_argument("--depth", type=int)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--check", choices=("all",) + TheoremVerifier.CHECK_NAMES)
    verify.add_argument("--samples", type=int)
    verify.add_argument("--length", type=int)
    verify.add_argument("--max-leaves", dest="max_leaves", type=int)

    enumerate_parser = subparsers.add_parser(
        "enumerate",
        parents=[global_options, structure_options, measure_options],
        help="every word of one length with b and weight",
    )
    enumerate_parser.add_argument("--depth", type=int)
    enumerate_parser.add_argument("--max-leaves", dest="max_leaves", type=int)

    histogram = subparsers.add_parser(
        "histogram",
        parents=[global_options, structure_options, measure_options],
        help="P_m (angle) or Q_m (radius) histogram",
    )
    histogram.add_argument("--depth", type=int)
    histogram.add_argument("--bins", type=int)
    histogram.add_argument("--range", choices=RANGES)
    histogram.add_argument("--kind", choices=KINDS)
    histogram.add_argument("--max-leaves", dest="max_leaves", type=int)

    montecarlo = subparsers.add_parser(
        "montecarlo",
        parents=[global_options, structure_options, measure_options],
        help="quantiles of |sum b^2 - 1/2| along random words",
    )
    montecarlo.add_argument("--samples", type=int)
    montecarlo.add_argument("--length", type=int)
    montecarlo.add_argument("--seed", type=int)

    return parser


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    names = set(RunConfig.field_names())
    return {k: v for k, v in vars(args).items() if k in names and v is not None}


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


class CommandContext:
    """Resolved config plus the objects every subcommand needs."""

    def __init__(self, subcommand: str, config: RunConfig):
        self.subcommand = subcommand
        self.config = config
        self.started = time.perf_counter()
        self.builder = StructureBuilder(config.exact_cap, config.certify_cap)
        self._model: Optional[EnergyModel] = None

    @property
    def model(self) -> EnergyModel:
        if self._model is None:
            hs = self.builder.build_harmonic_structure(self.config.level, self.config.backend)
            self._model = EnergyModel.from_structure(hs)
        return self._model

    def measure(self) -> WordMeasure:
        return WordMeasure.from_config(self.config.measure, self.config.weights)

    def enumerator(self) -> WordEnumerator:
        return WordEnumerator(
            self.model, self.config.max_leaves, self.config.allow_deep, self.config.threads
        )

    def metadata(self, **extra: Any) -> Dict[str, Any]:
        wall = time.perf_counter() - self.started if self.config.timing else None
        extra.setdefault("effective_backend", self.model.hs.backend)
        return build_metadata(self.subcommand, self.config.to_metadata(), wall, **extra)

    def emit_table(self, header: Sequence[str], rows: Iterable[Sequence[Any]], **extra: Any) -> None:
        metadata = self.metadata(**extra)
        if self.config.format == "json":
            text = render_json(
                {"metadata": metadata, "header": list(header), "rows": [list(r) for r in rows]}
            )
        else:
            text = render_csv(metadata, header, rows)
        write_output(text, self.config.out)

    def emit_json(self, document: Dict[str, Any]) -> None:
        if self.config.format == "csv":
            raise ConfigError(f"{self.subcommand} writes JSON only")
        write_output(render_json(document), self.config.out)


def cmd_structure(ctx: CommandContext) -> int:
    hs = ctx.model.hs
    a2 = ctx.builder.check_a2(hs.structure, hs)
    ctx.emit_json({"metadata": ctx.metadata(), "structure": structure_summary(hs, a2)})
    return 0


def cmd_coeffs(ctx: CommandContext) -> int:
    config = ctx.config
    if config.word is None:
        raise ConfigError("coeffs needs --word")
    model = ctx.model
    w = Word.parse(config.word, model.num_symbols)
    c = model.coefficients(w)
    header: List[str] = ["word", "a1", "a2", "a3", "b1", "b2", "b3", "r", "theta", "sumsq"]
    label = w.label(model.num_symbols)
    row: List[Any] = [label, *c.a, *c.b.b, c.polar.radius, c.polar.theta, c.sum_squares]
    if config.f is not None:
        energy = model.cell_energy(config.f, w)
        header += ["energy_f", "energy_ratio"]
        row += [energy, energy / model.nu_mass(w)]
    ctx.emit_table(header, [row])
    return 0


def cmd_verify(ctx: CommandContext) -> int:
    config = ctx.config
    if config.check != "all" and config.check not in TheoremVerifier.CHECK_NAMES:
        raise ConfigError(f"unknown check {config.check!r}")
    verifier = TheoremVerifier(
        ctx.model,
        builder=ctx.builder,
        workers=config.threads,
        max_leaves=config.max_leaves,
        allow_deep=config.allow_deep,
        timing=config.timing,
    )
    reports = verifier.run(config.check, config.depth, config.seed, config.samples, config.length)
    failed = [r for r in reports if not r.passed]
    ctx.emit_json(
        {
            "metadata": ctx.metadata(passed=not failed),
            "reports": [r.to_dict() for r in reports],
        }
    )
    for report in failed:
        witness = report.witness.to_dict() if report.witness else None
        print(f"check {report.check} FAILED: witness {witness}", file=sys.stderr)
    return 1 if failed else 0


def cmd_enumerate(ctx: CommandContext) -> int:
    config = ctx.config
    callback = print_progress if _progress_enabled() else None
    batch = ctx.enumerator().enumerate(config.depth, ctx.measure(), progress_callback=callback)
    radius, theta, _ = polar_arrays(batch.b)

    def rows() -> Iterable[List[Any]]:
        for i in range(len(batch)):
            b = batch.b[i]
            yield [
                batch.word(i).label(batch.num_symbols),
                float(b[0]), float(b[1]), float(b[2]),
                float(radius[i]), float(theta[i]), float(batch.weight[i]),
            ]

    ctx.emit_table(
        ["word", "b1", "b2", "b3", "r", "theta", "weight"],
        rows(),
        words=len(batch),
        total_weight=float(np.sum(batch.weight)),
    )
    return 0


def cmd_histogram(ctx: CommandContext) -> int:
    config = ctx.config
    callback = print_progress if _progress_enabled() else None
    service = HistogramService()
    bins = config.effective_bins()
    if config.kind == "theta":
        hist = service.enumerate_theta(
            ctx.enumerator(), config.depth, ctx.measure(), bins, config.range, callback
        )
    else:
        hist = service.enumerate_radius(ctx.enumerator(), config.depth, ctx.measure(), bins, callback)
    ctx.emit_table(
        ["bin_lo", "bin_hi", "mass"],
        hist.rows(),
        kind=hist.kind,
        bins=hist.bins,
        total_mass=hist.total_mass,
        out_of_range_mass=hist.out_of_range_mass,
        mean=hist.mean(),
        symmetric_binning=hist.symmetric_binning,
        rotation_defect=hist.rotation_defect,
        reflection_defect=hist.reflection_defect,
    )
    return 0


def cmd_montecarlo(ctx: CommandContext) -> int:
    config = ctx.config
    callback = print_chunk_progress if _progress_enabled() else None
    service = MonteCarloService(ctx.model, config.threads)
    result = service.run(
        config.samples, config.length, config.seed, ctx.measure(), progress_callback=callback
    )
    ctx.emit_table(["n", "q10", "median", "q90"], result.quantile_rows())
    return 0


COMMANDS: Dict[str, Callable[[CommandContext], int]] = {
    "structure": cmd_structure,
    "coeffs": cmd_coeffs,
    "verify": cmd_verify,
    "enumerate": cmd_enumerate,
    "histogram": cmd_histogram,
    "montecarlo": cmd_montecarlo,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand.

    Returns:
        0 on success, 1 when a verification check fails, 2 on usage,
        configuration or domain errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2

    configure_logging(getattr(args, "verbose", False), getattr(args, "quiet", False))
    try:
        config = RunConfig.resolve(_overrides(args), getattr(args, "config", None))
        return COMMANDS[args.command](CommandContext(args.command, config))
    except GasketError as e:
        logger.debug("run failed", exc_info=True)
        sys.stderr.write(parser.format_usage())
        print(f"gasket-energy: error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
