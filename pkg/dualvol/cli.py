"""Command-line front end.

Exit codes: 0 when the computation finished and every requested check passed,
1 when a check failed (the report is still written), 2 on usage or input errors.
"""
import argparse
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from dualvol import __version__
from dualvol.characterize.diagnostics import diagonality_test
from dualvol.characterize.pipeline import STAGES, characterize
from dualvol.characterize.recovery import recover_measure
from dualvol.characterize.valuation import valuation_pipeline
from dualvol.config import (
    DEFAULT_MC_SAMPLES,
    DEFAULT_TOLERANCE,
    DEFAULT_TRIALS,
    RunConfig,
    Settings,
)
from dualvol.core.mixed_volume import dual_mixed_volume, mixed_volume_bound, verify_lutwak
from dualvol.core.sphere import SphereGrid, surface_measure
from dualvol.core.starset import StarSet
from dualvol.engines.monte_carlo import convergence_series
from dualvol.errors import DualVolError, InvalidParameterError, RequiresGridError
from dualvol.functionals.auditor import DEFAULT_CHECKS, PropertyAuditor
from dualvol.functionals.base import Functional
from dualvol.functionals.checks import Verdict
from dualvol.functionals.implementations import mixed_volume_functional
from dualvol.functionals.registry import FunctionalRegistry
from dualvol.io.descriptors import load_bodies, load_functional, parse_grid
from dualvol.io.reports import emit_plot_data, write_report
from dualvol.utils.logging import get_logger, setup_logging

logger = get_logger("dmv.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

Series = Tuple[List[str], List[Sequence]]


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", help="exact grid, e.g. dim=2,m=64 or dim=3,bands=4,sectors=8")
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE, help="relative tolerance")
    common.add_argument(
        "--trials", type=int, default=DEFAULT_TRIALS, help="random trials per check"
    )
    common.add_argument(
        "--seed", type=int, default=None, help="seed for every stochastic step (or DMV_SEED)"
    )
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    common.add_argument(
        "--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (or DMV_LOG_LEVEL)"
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmv", description="Dual mixed volumes and their characterization."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_flags()
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("compute", parents=[common], help="dual mixed volume or volume of star sets")
    p.add_argument("--bodies", required=True, help="JSON file of star-set descriptors")
    p.add_argument(
        "--mc", type=int, default=None, metavar="N", help="use Monte Carlo with N directions"
    )

    p = sub.add_parser("lutwak", parents=[common], help="Lutwak polynomial expansion and its check")
    p.add_argument("--bodies", required=True)
    p.add_argument(
        "--t", default=None, help="comma-separated nonnegative coefficients (default: all 1)"
    )

    p = sub.add_parser("audit", parents=[common], help="run property checks on a functional")
    p.add_argument("--functional", required=True, help="file, gallery:NAME or dmv[:c]")
    p.add_argument("--checks", default=",".join(DEFAULT_CHECKS))

    p = sub.add_parser("characterize", parents=[common], help="full characterization pipeline")
    p.add_argument("--functional", required=True)
    p.add_argument(
        "--real-valued", action="store_true", help="check monotonicity instead of positivity"
    )
    p.add_argument("--up-to", choices=STAGES, default="constant")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plot-data", default=None, help="CSV of the F/dmv ratio series")

    p = sub.add_parser(
        "valuation", parents=[common], help="valuation pipeline mu(A) = F(st A, ..., st A)"
    )
    p.add_argument("--functional", required=True)
    p.add_argument("--plot-data", default=None, help="CSV of the per-cell density profile")

    p = sub.add_parser("recover-measure", parents=[common], help="recover the representing kernel")
    p.add_argument("--functional", required=True)
    p.add_argument("--diagonal-only", action="store_true")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--validation-trials", type=int, default=100)
    p.add_argument("--plot-data", default=None, help="CSV of the diagonal density profile")

    p = sub.add_parser("counterexamples", parents=[common], help="audit the counterexample gallery")
    p.add_argument("--checks", default="additive,vanishing,rotation")

    p = sub.add_parser("mc-converge", parents=[common], help="Monte Carlo convergence series")
    p.add_argument("--bodies", required=True)
    p.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES)
    p.add_argument("--plot-data", default=None, help="CSV of (samples, estimate, stderr)")

    return parser


def _grid(config: RunConfig, required: bool = True) -> Optional[SphereGrid]:
    if config.grid_spec:
        return parse_grid(config.grid_spec)
    if required:
        raise InvalidParameterError(f"--grid is required for '{config.subcommand}'")
    return None


def _resolve_functional(
    spec: str, config: RunConfig, settings: Settings
) -> Tuple[Functional, SphereGrid]:
    """``gallery:NAME``, ``dmv`` / ``dmv:c``, or a kernel/diagonal JSON file."""
    if spec.startswith("gallery:"):
        grid = _grid(config)
        registry = FunctionalRegistry(settings.registry_path)
        return registry.build(spec.split(":", 1)[1], grid.dim, grid), grid
    if spec == "dmv" or spec.startswith("dmv:"):
        grid = _grid(config)
        c = float(spec.split(":", 1)[1]) if ":" in spec else 1.0
        if not math.isfinite(c) or c < 0.0:
            raise InvalidParameterError(f"dmv constant must be nonnegative, got {c}")
        return mixed_volume_functional(grid.dim, c, grid), grid
    functional = load_functional(spec, _grid(config, required=False))
    return functional, functional.grid


def _emit(config: RunConfig, payload: Dict, series: Optional[Series] = None):
    if config.output_format == "csv":
        if series is None:
            raise InvalidParameterError(
                f"'{config.subcommand}' has no series output; use --format json"
            )
        emit_plot_data(series[0], series[1], config.output)
    else:
        write_report(payload, config.output)


def _plot(path: Optional[str], series: Optional[Series]):
    if path and series is not None:
        emit_plot_data(series[0], series[1], path)


def _arguments(bodies: List[StarSet]) -> List[StarSet]:
    if len(bodies) == 1:
        return bodies * bodies[0].dim
    return bodies


def cmd_compute(args, config: RunConfig, settings: Settings) -> int:
    bodies = _arguments(load_bodies(args.bodies))
    grid = _grid(config, required=False)
    seed = config.require_seed() if args.mc is not None else config.seed
    result = dual_mixed_volume(bodies, samples=args.mc, seed=seed, grid=grid)
    payload = result.to_dict()
    payload["bound"] = mixed_volume_bound(bodies)
    _emit(config, payload)
    return EXIT_OK


def cmd_lutwak(args, config: RunConfig, settings: Settings) -> int:
    bodies = load_bodies(args.bodies)
    t = [float(x) for x in args.t.split(",")] if args.t else [1.0] * len(bodies)
    check = verify_lutwak(bodies, t, _grid(config, required=False), tol=config.tolerance)
    _emit(config, check.to_dict())
    return EXIT_OK if check.passed else EXIT_CHECK_FAILED


def _check_names(text: str) -> List[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in PropertyAuditor.available_checks()]
    if unknown or not names:
        raise InvalidParameterError(
            f"unknown checks {unknown}; available: {', '.join(PropertyAuditor.available_checks())}"
        )
    return names


def cmd_audit(args, config: RunConfig, settings: Settings) -> int:
    names = _check_names(args.checks)
    functional, grid = _resolve_functional(args.functional, config, settings)
    auditor = PropertyAuditor(
        functional, grid, config.trials, config.require_seed(), config.tolerance
    )
    reports = auditor.run(names)
    summary = auditor.summary(reports)
    _emit(config, summary)
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED


def cmd_characterize(args, config: RunConfig, settings: Settings) -> int:
    functional, grid = _resolve_functional(args.functional, config, settings)
    report = characterize(
        functional, grid,
        trials=config.trials,
        seed=config.require_seed(),
        tol=config.tolerance,
        real_valued=args.real_valued,
        up_to=args.up_to,
        budget=args.budget or settings.recovery_budget,
        workers=args.workers or settings.workers,
    )
    series = (["trial", "F", "dmv", "ratio"], report.ratio_series())
    _emit(config, report.to_dict(), series)
    _plot(args.plot_data, series)
    return EXIT_OK if report.all_checks_passed else EXIT_CHECK_FAILED


def cmd_valuation(args, config: RunConfig, settings: Settings) -> int:
    functional, grid = _resolve_functional(args.functional, config, settings)
    report = valuation_pipeline(functional, grid, trials=config.trials, seed=config.require_seed(),
                                tol=config.tolerance)
    series = (["cell", "density", "weight"], report.density_profile(grid))
    _emit(config, report.to_dict(), series)
    _plot(args.plot_data, series)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_recover(args, config: RunConfig, settings: Settings) -> int:
    functional, grid = _resolve_functional(args.functional, config, settings)
    if grid is None:
        raise RequiresGridError("recover-measure needs --grid")
    recovered = recover_measure(
        functional, grid,
        budget=args.budget or settings.recovery_budget,
        diagonal_only=args.diagonal_only,
        validation_trials=args.validation_trials,
        seed=config.require_seed(),
        workers=args.workers or settings.workers,
    )
    diagonality = diagonality_test(recovered, config.tolerance)
    payload = recovered.to_dict()
    payload["diagonality"] = diagonality.to_dict()
    series = None
    if diagonality.projected is not None:
        density = diagonality.projected.density.tolist()
        weights = grid.weights.tolist()
        rows = [(k, d, float(w)) for k, (d, w) in enumerate(zip(density, weights))]
        series = (["cell", "density", "weight"], rows)
    _emit(config, payload, series)
    _plot(args.plot_data, series)
    return EXIT_OK if recovered.residual <= config.tolerance else EXIT_CHECK_FAILED


def cmd_counterexamples(args, config: RunConfig, settings: Settings) -> int:
    names = _check_names(args.checks)
    grid = _grid(config)
    seed = config.require_seed()
    registry = FunctionalRegistry(settings.registry_path)
    entries = []
    for name in registry.list_names():
        functional = registry.build(name, grid.dim, grid)
        auditor = PropertyAuditor(functional, grid, config.trials, seed, config.tolerance)
        reports = auditor.run(names)
        designated = registry.designated_failure(name)
        failed = sorted(r.name for r in reports if r.verdict == Verdict.FAIL)
        expected = [designated] if designated in names else []
        entries.append({
            "name": name,
            "designated": designated,
            "failed": failed,
            "as_expected": failed == expected,
            "reports": [r.to_dict() for r in reports],
        })
        logger.info(f"{name}: failed {failed}, designated {designated}")
    passed = all(entry["as_expected"] for entry in entries)
    _emit(config, {"grid": grid.grid_id, "seed": seed, "trials": config.trials,
                   "entries": entries, "passed": passed})
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_mc_converge(args, config: RunConfig, settings: Settings) -> int:
    bodies = _arguments(load_bodies(args.bodies))
    if args.samples < 1:
        raise InvalidParameterError(f"--samples must be >= 1, got {args.samples}")
    dim = bodies[0].dim
    if len(bodies) != dim:
        raise InvalidParameterError(f"dimension {dim} needs {dim} bodies, got {len(bodies)}")
    scale = surface_measure(dim) / dim
    series = convergence_series(bodies, args.samples, config.require_seed(), scale)
    rows = [(n, estimate, stderr) for n, estimate, stderr in series]
    payload = {
        "seed": config.seed,
        "series": [{"samples": n, "estimate": e, "stderr": s} for n, e, s in rows],
        "final": {"samples": rows[-1][0], "estimate": rows[-1][1], "stderr": rows[-1][2]},
    }
    data = (["samples", "estimate", "stderr"], rows)
    _emit(config, payload, data)
    _plot(args.plot_data, data)
    return EXIT_OK


HANDLERS: Dict[str, Callable] = {
    "compute": cmd_compute,
    "lutwak": cmd_lutwak,
    "audit": cmd_audit,
    "characterize": cmd_characterize,
    "valuation": cmd_valuation,
    "recover-measure": cmd_recover,
    "counterexamples": cmd_counterexamples,
    "mc-converge": cmd_mc_converge,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = Settings.from_env()
    except ValueError as e:
        print(f"dmv: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    setup_logging(log_level=args.log_level or settings.log_level, log_file=settings.log_file)

    config = RunConfig(
        subcommand=args.command,
        inputs=[v for v in (getattr(args, "bodies", None), getattr(args, "functional", None)) if v],
        grid_spec=args.grid,
        tolerance=args.tol,
        trials=args.trials,
        seed=args.seed if args.seed is not None else settings.default_seed,
        output=args.out,
        output_format=args.format,
    )
    logger.debug(f"Running {config.subcommand} with {config}")

    try:
        return HANDLERS[args.command](args, config, settings)
    except (DualVolError, ValueError, OSError) as e:
        logger.debug("Subcommand failed", exc_info=True)
        print(f"dmv: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
