import argparse
import logging
import math
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from spin_processor.config import Config, load_experiment_file
from spin_processor.exceptions import (
    ExperimentConfigError,
    NumericalFailure,
    OffDiskError,
    OutputError,
    PoleError,
    UndefinedRepresentativeError,
)
from spin_processor.models import ExperimentConfig, HamiltonianParams, IntegratorConfig
from spin_processor.processor import EngineName, ExperimentProcessor, MomentFunction
from spin_processor.spin_rep import SpinSize, spin_size

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

DEFAULT_J = {
    "fig1": "5,10,20,30",
    "compare-exact": "5,10,20",
    "overlap-scan": "5,10,20,40,80",
    "moment-error": "5,10,20,40,80",
    "identity-check": "1/2,10",
    "evolve": "5",
}
DEFAULT_ALPHAS = ",".join(f"{k * math.pi / 8!r}" for k in range(9))
DEFAULT_THETAS = ",".join(f"{k * math.pi / 8!r}" for k in range(5))
DEFAULT_GRIDS = "8x8,16x16,32x32,64x64,128x128"

# command line flag -> key in the experiment file
FLAG_KEYS = {
    "j": "j",
    "epsilon": "epsilon",
    "lambda_": "lambda",
    "mu": "mu",
    "theta": "theta",
    "phi": "phi",
    "q0": "q0",
    "p0": "p0",
    "t_final": "t_final",
    "samples": "samples",
    "step": "step",
    "scheme": "scheme",
    "energy_tolerance": "energy_tolerance",
    "out": "out",
    "svg": "svg",
    "seed": "seed",
    "window": "window",
}


def split_list(text: str) -> List[str]:
    return [item for item in re.split(r"[,\s]+", text.strip()) if item]


def parse_spins(text: str) -> List[SpinSize]:
    try:
        return [spin_size(item) for item in split_list(text)]
    except ValueError as e:
        raise ExperimentConfigError(f"Invalid spin list '{text}': {e}") from e


def parse_floats(text: str) -> List[float]:
    try:
        return [float(item) for item in split_list(text)]
    except ValueError as e:
        raise ExperimentConfigError(f"Invalid number list '{text}': {e}") from e


def parse_grids(text: str) -> List[Tuple[int, int]]:
    """'16x16,32x64' -> [(16, 16), (32, 64)]; a bare '16' means 16x16"""
    grids = []
    for item in split_list(text):
        match = re.fullmatch(r"(\d+)(?:[xX](\d+))?", item)
        if match is None:
            raise ExperimentConfigError(f"Invalid grid '{item}', expected NxM")
        n_theta = int(match.group(1))
        grids.append((n_theta, int(match.group(2) or n_theta)))
    return grids


def merge_settings(args: argparse.Namespace) -> Dict[str, str]:
    """Config file values overridden by the flags given on the command line"""
    settings: Dict[str, str] = {}
    if args.config:
        settings.update(load_experiment_file(args.config))
    # an initial condition on the command line replaces the one from the file
    if args.theta is not None or args.phi is not None:
        settings.pop("q0", None)
        settings.pop("p0", None)
    if args.q0 is not None or args.p0 is not None:
        settings.pop("theta", None)
        settings.pop("phi", None)
    for attr, key in FLAG_KEYS.items():
        value = getattr(args, attr, None)
        if value is None or value is False:
            continue
        settings[key] = "true" if value is True else str(value)
    return settings


def build_experiment(settings: Dict[str, str], default_j: str) -> ExperimentConfig:
    """Validated experiment configuration from merged string settings"""
    params: Dict[str, Any] = {
        name: settings[key]
        for name, key in (("epsilon", "epsilon"), ("lambda_", "lambda"), ("mu", "mu"))
        if key in settings
    }
    integrator: Dict[str, Any] = {
        key: settings[key] for key in ("step", "scheme", "energy_tolerance") if key in settings
    }
    fields: Dict[str, Any] = {
        "j_list": parse_spins(settings.get("j", default_j)),
        "params": HamiltonianParams(**params),
        "integrator": IntegratorConfig(**integrator),
    }
    for name, key in (
        ("theta", "theta"),
        ("phi", "phi"),
        ("q0", "q0"),
        ("p0", "p0"),
        ("t_final", "t_final"),
        ("n_samples", "samples"),
        ("output_dir", "out"),
        ("emit_svg", "svg"),
        ("seed", "seed"),
        ("window", "window"),
    ):
        if key in settings:
            fields[name] = settings[key]
    return ExperimentConfig(**fields)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--j", type=str, help="Spin sizes, e.g. '5,10,20' or '1/2 5/2'")
    common.add_argument("--epsilon", type=str, help="Coefficient of Jz")
    common.add_argument("--lambda", dest="lambda_", type=str, help="Coefficient of -Jx")
    common.add_argument("--mu", type=str, help="Coefficient of Jz^2")
    start = common.add_mutually_exclusive_group()
    start.add_argument("--theta", type=str, help="Initial polar angle (with --phi)")
    start.add_argument("--q0", type=str, help="Initial canonical q (with --p0)")
    common.add_argument("--phi", type=str, help="Initial azimuth")
    common.add_argument("--p0", type=str, help="Initial canonical p")
    common.add_argument("--t-final", dest="t_final", type=str, help="Final time")
    common.add_argument("--samples", type=str, help="Number of output samples")
    common.add_argument("--step", type=str, help="Integrator step")
    common.add_argument("--scheme", type=str, choices=["rk4", "midpoint"], help="Integrator")
    common.add_argument(
        "--energy-tolerance", dest="energy_tolerance", type=str, help="Allowed energy drift per unit time"
    )
    common.add_argument("--window", type=str, help="Short-time window for exact comparisons")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--svg", action="store_true", help="Also write SVG figures")
    common.add_argument("--config", type=str, help="key = value experiment file")
    common.add_argument("--seed", type=str, help="Seed for randomized checks")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        description="Quantum, constrained coherent-state and classical spin-J dynamics"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("fig1", parents=[common], help="Reduced vs classical Jz(t) per J")
    commands.add_parser("compare-exact", parents=[common], help="Add the exact quantum evolution")

    overlap = commands.add_parser("overlap-scan", parents=[common], help="Coherent-state overlap decay")
    overlap.add_argument("--alpha", type=str, default=DEFAULT_ALPHAS, help="Angles in [0, pi]")
    overlap.add_argument("--random-pairs", type=int, default=0, help="Extra random pairs per J")

    moment = commands.add_parser("moment-error", parents=[common], help="Moment factorization error")
    moment.add_argument(
        "--function", type=str, default="jz_squared", choices=[f.value for f in MomentFunction]
    )
    moment.add_argument("--theta-grid", type=str, default=DEFAULT_THETAS, help="Polar angles")

    identity = commands.add_parser("identity-check", parents=[common], help="Resolution of identity")
    identity.add_argument("--grid", type=str, default=DEFAULT_GRIDS, help="Quadrature sizes NxM")

    evolve = commands.add_parser("evolve", parents=[common], help="Single trajectory per J")
    evolve.add_argument(
        "--engine", type=str, default="reduced", choices=[e.value for e in EngineName]
    )
    return parser


def run_command(args: argparse.Namespace) -> None:
    settings = merge_settings(args)
    experiment = build_experiment(settings, DEFAULT_J[args.command])
    processor = ExperimentProcessor(experiment)
    logger.info(f"Running {args.command} for J={', '.join(str(s) for s in experiment.sorted_spins())}")

    if args.command == "fig1":
        report = processor.run_fig1()
        logger.info(f"Max deviations: {report.deviations()}")
    elif args.command == "compare-exact":
        report = processor.run_exact_comparison()
        logger.info(f"Max deviations: {report.deviations()}")
    elif args.command == "overlap-scan":
        worst = processor.run_overlap_scan(parse_floats(args.alpha), args.random_pairs)
        logger.info(f"Max overlap discrepancy: {worst:.3e}")
    elif args.command == "moment-error":
        slopes = processor.run_moment_error_scan(
            MomentFunction(args.function), parse_floats(args.theta_grid)
        )
        logger.info(f"Fitted slopes: {slopes}")
    elif args.command == "identity-check":
        for spin in experiment.sorted_spins():
            processor.run_identity_check(spin, parse_grids(args.grid))
    elif args.command == "evolve":
        processor.run_evolve(EngineName(args.engine))

    logger.info(f"Results saved to {processor.output_dir}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else Config.LOG_LEVEL)

    try:
        run_command(args)
    except (ExperimentConfigError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except (NumericalFailure, OffDiskError, PoleError, UndefinedRepresentativeError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except (OutputError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_CONFIG

    return EXIT_OK


if __name__ == "__main__":
    exit(main())
