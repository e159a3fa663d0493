"""
Command-line front end.

Subcommands mirror the pipeline stages and compose through files:
``prepare`` writes a state, ``tomo``/``entangle``/``bell``/``sweep`` read one,
``grape`` optimizes a CNOT and ``pipeline`` runs everything from a config.

Exit codes: 0 success, 2 configuration or input error, 3 numerical
non-convergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
from collections.abc import Sequence
import json
import logging
from pathlib import Path
import sys
from typing import Any

import colorlog
from pydantic import ValidationError as PydanticValidationError

from .config import PipelineConfig
from .const import DIM, DOMAIN
from .diagnostics import get_pipeline_diagnostics
from .pipeline import GRAPE_CONTROLS_FILE, SWEEP_FILE, Pipeline, emit_tomograph
from .sim import io
from .sim.bell import (
    classical_bound_bruteforce,
    correlators,
    default_grid,
    evaluate,
    incompatibility_sweep,
    t26,
)
from .sim.circuits import cnot_matrix, s_prep_circuit
from .sim.constants import (
    GrapeMethod,
    NegativityConvention,
    OutputFormat,
    Party,
    StateSource,
)
from .sim.entanglement import pairwise_concurrences, tripartite_negativity
from .sim.exceptions import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    NmrBellError,
    StageError,
)
from .sim.grape import GrapeProblem, grape_multistart
from .sim.nmr import lower_circuit
from .sim.qstate import DensityMatrix
from .sim.tomography import TomographySetting, reconstruct, simulate_protocol

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_IO = 4

_LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def setup_logging(verbose: bool) -> None:
    """Install a coloured stderr handler on the package logger."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(_LOG_FORMAT))
    logger = logging.getLogger(DOMAIN)
    logger.handlers[:] = [handler]
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    logger.propagate = False


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    return config.with_overrides(seed=args.seed, output_dir=args.out)


def _load_state(path: Path) -> DensityMatrix:
    rho = io.load_density(path)
    if rho.dim != DIM:
        raise DimensionError(f"{path}: expected a {DIM}×{DIM} state, got {rho.dim}×{rho.dim}")
    return rho


def cmd_prepare(args: argparse.Namespace) -> int:
    """Prepare |S⟩ at gate or pulse level and write it."""
    config = _load_config(args)
    if args.source is not None:
        state = config.state.model_copy(update={"source": args.source})
        config = config.model_copy(update={"state": state})
    out = config.output_dir
    rho = Pipeline(config).prepare()
    circuit = s_prep_circuit()
    io.save_circuit(circuit, out / "circuit.json")
    if config.state.source == StateSource.PULSE:
        program = lower_circuit(circuit, config.state.spin_system)
        io.save_pulse_sequence(program.events, out / "pulse_sequence.json")
    io.save_density(rho, out / "state.json", config.seed)
    _LOGGER.info("Prepared state written to %s", out / "state.json")
    return EXIT_OK


def cmd_tomo(args: argparse.Namespace) -> int:
    """Simulate readout of a state and reconstruct it."""
    config = _load_config(args)
    out = config.output_dir
    rho = _load_state(args.state)
    labels = args.settings or config.tomography.settings
    sigma = args.sigma if args.sigma is not None else config.tomography.sigma
    seed = config.tomography_seed
    if sigma > 0 and seed is None:
        raise ConfigError("a seed is required when sigma > 0")
    records = simulate_protocol(rho, [TomographySetting(s) for s in labels], sigma, seed)
    io.save_records(records, out / "records.json")
    result = reconstruct(records)
    _write_json(
        out / "reconstruction.json",
        {
            "rho_hat": io.density_to_json(result.rho_hat),
            "residual": result.residual,
            "iterations": result.iterations,
            "converged": result.converged,
            "seed": seed,
        },
    )
    if args.format == OutputFormat.CSV:
        emit_tomograph(result.rho_hat, out, seed)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_entangle(args: argparse.Namespace) -> int:
    """Compute negativities and concurrences of a state."""
    config = _load_config(args)
    rho = _load_state(args.state)
    report = tripartite_negativity(rho, config.analysis.negativity_convention)
    plain = tripartite_negativity(rho, NegativityConvention.PLAIN)
    payload = {
        "negativity": report.model_dump(mode="json"),
        "negativity_plain": plain.tripartite,
        "concurrence": {f"{i}{j}": c for (i, j), c in pairwise_concurrences(rho).items()},
        "seed": config.seed,
    }
    _write_json(config.output_dir / "entanglement.json", payload)
    return EXIT_OK


def cmd_bell(args: argparse.Namespace) -> int:
    """Evaluate a Bell functional and its local bound on a state."""
    config = _load_config(args)
    rho = _load_state(args.state)
    path = args.functional or config.bell.functional_path
    functional = io.load_functional(path) if path else t26()
    settings = config.bell.measurement_settings()
    value = evaluate(functional, rho, settings)
    bound = classical_bound_bruteforce(functional)
    payload = {
        "functional": functional.name,
        "value": value,
        "classical_bound": functional.classical_bound,
        "enumerated_bound": bound.bound,
        "argmax_strategies": [list(s) for s in bound.strategies],
        "violated": value > functional.classical_bound,
        "correlators": correlators(functional, rho, settings),
        "seed": config.seed,
    }
    _write_json(config.output_dir / "bell.json", payload)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Sweep one observable through the x–z plane."""
    config = _load_config(args)
    out = config.output_dir
    bell = config.bell
    rho = _load_state(args.state)
    party = args.party or bell.sweep_party
    which = args.which if args.which is not None else bell.sweep_which
    curve = incompatibility_sweep(
        rho,
        bell.measurement_settings(),
        party,
        which,
        default_grid(args.points or bell.sweep_points),
    )
    if args.format == OutputFormat.CSV:
        io.write_sweep_csv(curve.rows(), out / SWEEP_FILE, config.seed)
    else:
        _write_json(
            out / "sweep.json",
            {
                "slot": f"{curve.party}{curve.which}",
                "argmax_theta": curve.argmax_theta,
                "max_value": curve.max_value,
                "rows": curve.rows(),
                "seed": config.seed,
            },
        )
    return EXIT_OK


def cmd_grape(args: argparse.Namespace) -> int:
    """Optimize shaped controls for a CNOT."""
    config = _load_config(args)
    cfg = config.grape
    out = config.output_dir
    control = args.control or cfg.control
    target = args.target or cfg.target
    if control == target:
        raise ConfigError("grape control and target must differ")
    problem = GrapeProblem(
        target=cnot_matrix(control, target),
        system=config.state.spin_system,
        segments=args.segments or cfg.segments,
        duration=args.duration or cfg.duration,
        max_iters=args.max_iters or cfg.max_iters,
        target_fidelity=cfg.target_fidelity,
        method=args.method or cfg.method,
        seed=config.grape_seed,
    )
    result = grape_multistart(problem, args.restarts or cfg.restarts)
    io.write_controls_csv(result.controls, out / GRAPE_CONTROLS_FILE, result.seed)
    _write_json(
        out / "grape.json",
        {
            "gate": f"cnot({control},{target})",
            "fidelity": result.fidelity,
            "iterations": result.iterations,
            "converged": result.converged,
            "seed": result.seed,
            "fidelity_history": result.fidelity_history,
        },
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_pipeline(args: argparse.Namespace) -> int:
    """Run the full pipeline from a config file."""
    config = _load_config(args)
    pipeline = Pipeline(config)
    report = pipeline.run()
    pipeline.write_outputs(report)
    if args.diagnostics:
        _write_json(config.output_dir / "diagnostics.json", get_pipeline_diagnostics(pipeline))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="pipeline config JSON")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=_non_negative, help="root seed")
    common.add_argument(
        "--format",
        type=OutputFormat,
        choices=list(OutputFormat),
        default=OutputFormat.JSON,
        help="format of data outputs",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="nmr-bell", description="Three-qubit |S⟩ state and T26 Bell simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", parents=[common], help="prepare |S⟩")
    p.add_argument(
        "--source",
        type=StateSource,
        choices=[StateSource.CIRCUIT, StateSource.PULSE, StateSource.MAXIMALLY_MIXED],
    )
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("tomo", parents=[common], help="simulate tomography")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--sigma", type=float)
    p.add_argument("--settings", nargs="+", help="setting labels, e.g. III IIY")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("entangle", parents=[common], help="negativity and concurrence")
    p.add_argument("--state", type=Path, required=True)
    p.set_defaults(func=cmd_entangle)

    p = sub.add_parser("bell", parents=[common], help="evaluate a Bell functional")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--functional", type=Path, help="functional text file (default T26)")
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("sweep", parents=[common], help="incompatibility sweep")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--party", type=Party, choices=list(Party))
    p.add_argument("--which", type=int, choices=(0, 1))
    p.add_argument("--points", type=_positive)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("grape", parents=[common], help="optimize a CNOT pulse")
    p.add_argument("--control", type=int, choices=(1, 2, 3))
    p.add_argument("--target", type=int, choices=(1, 2, 3))
    p.add_argument("--segments", type=_positive)
    p.add_argument("--duration", type=float, help="seconds")
    p.add_argument("--max-iters", type=_positive)
    p.add_argument("--restarts", type=_positive)
    p.add_argument("--method", type=GrapeMethod, choices=list(GrapeMethod))
    p.set_defaults(func=cmd_grape)

    p = sub.add_parser("pipeline", parents=[common], help="run every stage")
    p.add_argument("--diagnostics", action="store_true", help="also write diagnostics.json")
    p.set_defaults(func=cmd_pipeline)
    return parser


def exit_code_for(err: BaseException) -> int:
    """Map an exception to the documented exit code."""
    if isinstance(err, StageError):
        return exit_code_for(err.cause)
    if isinstance(err, ConvergenceError):
        return EXIT_NOT_CONVERGED
    if isinstance(err, OSError):
        return EXIT_IO
    if isinstance(err, NmrBellError | PydanticValidationError | ValueError):
        return EXIT_CONFIG
    return EXIT_FAILURE


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return int(args.func(args))
    except (NmrBellError, PydanticValidationError, ValueError, OSError) as err:
        _LOGGER.error("%s", err)
        print(f"error: {err}", file=sys.stderr)  # noqa: T201
        return exit_code_for(err)
