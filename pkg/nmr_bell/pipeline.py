"""End-to-end pipeline: prepare, add noise, tomograph, certify, report."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from .config import PipelineConfig
from .const import (
    DIM,
    REFERENCE_CONCURRENCE_RANGE,
    REFERENCE_FIDELITY,
    REFERENCE_NEGATIVITY,
    REFERENCE_T26,
    REPORT_SCHEMA_VERSION,
)
from .sim import io
from .sim.bell import (
    MeasurementSettings,
    ScanEntry,
    SweepCurve,
    classical_bound_bruteforce,
    default_grid,
    evaluate,
    incompatibility_scan,
    incompatibility_sweep,
    pps_scaled_evaluate,
    t26,
)
from .sim.circuits import (
    PseudopureSpec,
    ReferenceState,
    cnot_matrix,
    circuit_unitary,
    reference_state,
    s_prep_circuit,
)
from .sim.constants import StateSource
from .sim.entanglement import pairwise_concurrences, tripartite_negativity
from .sim.exceptions import DimensionError, NmrBellError, StageError
from .sim.grape import GrapeProblem, GrapeResult, grape_multistart
from .sim.models import BellFunctional, MeasurementRecord, NegativityReport
from .sim.nmr import lower_circuit, program_unitary
from .sim.noise import ReferenceFit, apply, fit_reference
from .sim.qstate import (
    DensityMatrix,
    StateVector,
    state_fidelity,
    trace_distance,
)
from .sim.tomography import (
    ReconstructionResult,
    TomographySetting,
    reconstruct,
    sensing_matrix,
    simulate_protocol,
)

_LOGGER = logging.getLogger(__name__)

REPORT_FILE = "report.json"
TOMOGRAPH_REAL_FILE = "tomograph_real.csv"
TOMOGRAPH_IMAG_FILE = "tomograph_imag.csv"
SWEEP_FILE = "sweep.csv"
GRAPE_CONTROLS_FILE = "grape_controls.csv"


class TomographySection(BaseModel):
    """Reconstruction quality."""

    settings: list[str]
    sigma: float
    seed: int | None
    sensing_rank: int
    fidelity_to_target: float
    trace_distance_to_prepared: float
    residual: float
    iterations: int
    converged: bool

    model_config = {"frozen": True, "extra": "forbid"}


class BellSection(BaseModel):
    """Bell functional value and its local bound."""

    functional: str
    value: float
    classical_bound: float
    enumerated_bound: float
    violated: bool
    pps_raw: float | None = Field(None, description="Value on the literal PPS matrix")
    pps_renormalized: float | None = Field(None, description="Value on the PPS core")

    model_config = {"frozen": True, "extra": "forbid"}


class SweepSlot(BaseModel):
    """Sweep summary for one observable slot."""

    slot: str
    base_value: float
    compatible_value: float
    argmax_theta: float
    max_value: float

    model_config = {"frozen": True, "extra": "forbid"}


class SweepSection(BaseModel):
    """Incompatibility sweep of the configured slot plus the six-slot scan."""

    slot: str
    points: int
    argmax_theta: float
    max_value: float
    value_at_zero: float
    scan: list[SweepSlot]

    model_config = {"frozen": True, "extra": "forbid"}


class ComparisonRow(BaseModel):
    """A computed value beside its experimental reference."""

    name: str
    predicted: float
    reference: float
    uncertainty: float
    residual: float

    model_config = {"frozen": True, "extra": "forbid"}


class CalibrationSection(BaseModel):
    """Single-parameter channel fitted to the reference fidelity."""

    kind: str
    parameter: float
    fidelity: float
    convention: str
    rows: list[ComparisonRow]

    model_config = {"frozen": True, "extra": "forbid"}


class GrapeSection(BaseModel):
    """GRAPE result summary."""

    gate: str
    fidelity: float
    iterations: int
    converged: bool
    seed: int

    model_config = {"frozen": True, "extra": "forbid"}


class PipelineReport(BaseModel):
    """Machine-readable pipeline result; ``schema_version`` bumps on breaking changes."""

    schema_version: int = REPORT_SCHEMA_VERSION
    seed: int | None = Field(description="Root seed of the run")
    seeds: dict[str, int | None]
    state_source: str
    prepared_fidelity: float
    fidelity_convention: str
    tomography: TomographySection | None
    negativity: NegativityReport
    concurrence: dict[str, float]
    bell: BellSection
    sweep: SweepSection
    comparison: list[ComparisonRow]
    calibration: CalibrationSection | None
    grape: GrapeSection | None

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def converged(self) -> bool:
        """False if any iterative stage stopped without converging."""
        ok = self.tomography is None or self.tomography.converged
        return ok and (self.grape is None or self.grape.converged)


@dataclass
class PipelineData:
    """Container for intermediate pipeline products."""

    target: StateVector | None = None
    prepared: DensityMatrix | None = None
    prepared_pure: StateVector | None = None
    noisy: DensityMatrix | None = None
    records: list[MeasurementRecord] = field(default_factory=list)
    reconstruction: ReconstructionResult | None = None
    analyzed: DensityMatrix | None = None
    negativity: NegativityReport | None = None
    concurrences: dict[tuple[int, int], float] = field(default_factory=dict)
    bell_value: float | None = None
    sweep: SweepCurve | None = None
    scan: list[ScanEntry] = field(default_factory=list)
    reference_fit: ReferenceFit | None = None
    grape: GrapeResult | None = None


class Pipeline:
    """Runs the stages in order, keeping every intermediate in ``data``."""

    def __init__(self, config: PipelineConfig) -> None:
        """Initialize the pipeline."""
        self.config = config
        self.data = PipelineData()
        self.functional: BellFunctional = (
            io.load_functional(config.bell.functional_path)
            if config.bell.functional_path
            else t26()
        )
        self.settings: MeasurementSettings = config.bell.measurement_settings()

    def _stage[T](self, name: str, func: Callable[[], T]) -> T:
        """Run one stage, wrapping any failure with the stage name."""
        _LOGGER.info("Stage %s", name)
        try:
            return func()
        except (NmrBellError, ValueError, OSError, np.linalg.LinAlgError) as err:
            if isinstance(err, StageError):
                raise
            _LOGGER.error("Stage %s failed: %s", name, err)
            raise StageError(name, err) from err

    def prepare(self) -> DensityMatrix:
        """Return the prepared state before noise."""
        cfg = self.config.state
        self.data.target = reference_state(ReferenceState.S)
        ground = StateVector.basis(0)
        match cfg.source:
            case StateSource.CIRCUIT:
                u = circuit_unitary(s_prep_circuit())
            case StateSource.PULSE:
                program = lower_circuit(s_prep_circuit(), cfg.spin_system)
                u = program_unitary(program, cfg.spin_system)
            case StateSource.FILE:
                rho = io.load_density(cfg.path)  # type: ignore[arg-type]
                if rho.dim != DIM:
                    raise DimensionError(
                        f"{cfg.path}: expected a {DIM}×{DIM} state, got {rho.dim}×{rho.dim}"
                    )
                return rho
            case StateSource.MAXIMALLY_MIXED:
                return DensityMatrix.maximally_mixed()
        self.data.prepared_pure = StateVector.normalized(u @ ground.amplitudes)
        return self.data.prepared_pure.density()

    def _tomography(self, rho: DensityMatrix) -> ReconstructionResult:
        cfg = self.config.tomography
        settings = [TomographySetting(label) for label in cfg.settings]
        self.data.records = simulate_protocol(
            rho, settings, cfg.sigma, self.config.tomography_seed
        )
        return reconstruct(self.data.records)

    def _bell(self, rho: DensityMatrix) -> BellSection:
        value = evaluate(self.functional, rho, self.settings)
        bound = classical_bound_bruteforce(self.functional).bound
        self.data.bell_value = value
        raw = renormalized = None
        analysis = self.config.analysis
        if analysis.pps_mode and self.data.prepared_pure is not None:
            pps = pps_scaled_evaluate(
                self.functional,
                PseudopureSpec(self.data.prepared_pure, analysis.epsilon),
                self.settings,
            )
            raw, renormalized = pps.raw, pps.renormalized
        return BellSection(
            functional=self.functional.name,
            value=value,
            classical_bound=self.functional.classical_bound,
            enumerated_bound=bound,
            violated=value > self.functional.classical_bound,
            pps_raw=raw,
            pps_renormalized=renormalized,
        )

    def _sweep(self, rho: DensityMatrix) -> SweepSection:
        cfg = self.config.bell
        grid = default_grid(cfg.sweep_points)
        curve = incompatibility_sweep(
            rho, self.settings, cfg.sweep_party, cfg.sweep_which, grid, self.functional
        )
        self.data.sweep = curve
        self.data.scan = incompatibility_scan(rho, self.settings, grid, self.functional)
        return SweepSection(
            slot=f"{cfg.sweep_party}{cfg.sweep_which}",
            points=len(grid),
            argmax_theta=curve.argmax_theta,
            max_value=curve.max_value,
            value_at_zero=float(curve.values[0]),
            scan=[
                SweepSlot(
                    slot=f"{e.party}{e.which}",
                    base_value=e.base_value,
                    compatible_value=e.compatible_value,
                    argmax_theta=e.argmax_theta,
                    max_value=e.max_value,
                )
                for e in self.data.scan
            ],
        )

    def _grape(self) -> GrapeResult:
        cfg = self.config.grape
        problem = GrapeProblem(
            target=cnot_matrix(cfg.control, cfg.target),
            system=self.config.state.spin_system,
            segments=cfg.segments,
            duration=cfg.duration,
            max_iters=cfg.max_iters,
            target_fidelity=cfg.target_fidelity,
            method=cfg.method,
            seed=self.config.grape_seed,
        )
        return grape_multistart(problem, cfg.restarts)

    def run(self) -> PipelineReport:
        """Run every stage and assemble the report."""
        cfg = self.config
        data = self.data
        prepared = self._stage("prepare", self.prepare)
        data.prepared = prepared
        target = data.target or reference_state(ReferenceState.S)
        noisy = prepared
        if cfg.noise is not None:
            noise = cfg.noise
            noisy = self._stage("noise", lambda: apply(noise, prepared))
        data.noisy = noisy
        convention = cfg.analysis.fidelity_convention
        prepared_fidelity = state_fidelity(target.density(), noisy, convention)

        tomography: TomographySection | None = None
        analyzed = noisy
        if cfg.tomography.enabled:
            result = self._stage("tomography", lambda: self._tomography(noisy))
            data.reconstruction = result
            analyzed = result.rho_hat
            tomography = TomographySection(
                settings=list(cfg.tomography.settings),
                sigma=cfg.tomography.sigma,
                seed=cfg.tomography_seed,
                sensing_rank=sensing_matrix(list(cfg.tomography.settings)).rank,
                fidelity_to_target=state_fidelity(
                    target.density(), result.rho_hat, convention
                ),
                trace_distance_to_prepared=trace_distance(result.rho_hat, noisy),
                residual=result.residual,
                iterations=result.iterations,
                converged=result.converged,
            )
        data.analyzed = analyzed

        negativity = self._stage(
            "entanglement",
            lambda: tripartite_negativity(analyzed, cfg.analysis.negativity_convention),
        )
        data.negativity = negativity
        data.concurrences = self._stage(
            "entanglement", lambda: pairwise_concurrences(analyzed)
        )
        bell = self._stage("bell", lambda: self._bell(analyzed))
        sweep = self._stage("sweep", lambda: self._sweep(analyzed))

        calibration: CalibrationSection | None = None
        if cfg.analysis.reference_fit:
            fit = self._stage(
                "reference", lambda: fit_reference(target, convention=convention)
            )
            data.reference_fit = fit
            calibration = CalibrationSection(
                kind=str(fit.calibration.kind),
                parameter=fit.calibration.parameter,
                fidelity=fit.calibration.fidelity,
                convention=str(fit.calibration.convention),
                rows=[_row(c.name, c.predicted, c.reference, c.uncertainty) for c in fit.comparisons],
            )

        grape: GrapeSection | None = None
        if cfg.grape.enabled:
            data.grape = self._stage("grape", self._grape)
            grape = GrapeSection(
                gate=f"cnot({cfg.grape.control},{cfg.grape.target})",
                fidelity=data.grape.fidelity,
                iterations=data.grape.iterations,
                converged=data.grape.converged,
                seed=data.grape.seed,
            )

        mean_concurrence = sum(data.concurrences.values()) / len(data.concurrences)
        report = PipelineReport(
            seed=cfg.seed,
            seeds={
                "seed": cfg.seed,
                "tomography": cfg.tomography_seed,
                "grape": cfg.grape_seed if cfg.grape.enabled else None,
            },
            state_source=str(cfg.state.source),
            prepared_fidelity=prepared_fidelity,
            fidelity_convention=str(convention),
            tomography=tomography,
            negativity=negativity,
            concurrence={f"{i}{j}": c for (i, j), c in data.concurrences.items()},
            bell=bell,
            sweep=sweep,
            comparison=_comparison(
                tomography.fidelity_to_target if tomography else prepared_fidelity,
                negativity.tripartite,
                bell.value,
                mean_concurrence,
            ),
            calibration=calibration,
            grape=grape,
        )
        _LOGGER.info(
            "Pipeline done: T26=%.4f (bound %.1f, violated=%s), N=%.4f",
            bell.value,
            bell.classical_bound,
            bell.violated,
            negativity.tripartite,
        )
        return report

    def write_outputs(self, report: PipelineReport, out_dir: Path | None = None) -> list[Path]:
        """
        Write the report and data files.

        Returns:
            The paths written, report first.

        """
        out = out_dir or self.config.output_dir
        out.mkdir(parents=True, exist_ok=True)
        written = [out / REPORT_FILE]
        written[0].write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        seed = self.config.seed
        if self.data.analyzed is not None:
            written += emit_tomograph(self.data.analyzed, out, seed)
        if self.data.sweep is not None:
            io.write_sweep_csv(self.data.sweep.rows(), out / SWEEP_FILE, seed)
            written.append(out / SWEEP_FILE)
        if self.data.grape is not None:
            io.write_controls_csv(
                self.data.grape.controls, out / GRAPE_CONTROLS_FILE, self.data.grape.seed
            )
            written.append(out / GRAPE_CONTROLS_FILE)
        _LOGGER.info("Wrote %d files to %s", len(written), out)
        return written


def _row(name: str, predicted: float, reference: float, uncertainty: float) -> ComparisonRow:
    return ComparisonRow(
        name=name,
        predicted=predicted,
        reference=reference,
        uncertainty=uncertainty,
        residual=predicted - reference,
    )


def _comparison(
    fidelity: float, negativity: float, t26_value: float, concurrence: float
) -> list[ComparisonRow]:
    low, high = REFERENCE_CONCURRENCE_RANGE
    return [
        _row("fidelity", fidelity, *REFERENCE_FIDELITY),
        _row("negativity", negativity, *REFERENCE_NEGATIVITY),
        _row("t26", t26_value, *REFERENCE_T26),
        _row("concurrence", concurrence, (low + high) / 2, (high - low) / 2),
    ]


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Run the pipeline and return its report without writing files."""
    return Pipeline(config).run()


def emit_tomograph(rho: DensityMatrix, out_dir: Path, seed: int | None = None) -> list[Path]:
    """Write Re ρ and Im ρ as labelled CSV matrices."""
    real_path = out_dir / TOMOGRAPH_REAL_FILE
    imag_path = out_dir / TOMOGRAPH_IMAG_FILE
    io.write_matrix_csv(rho.entries.real, real_path, seed)
    io.write_matrix_csv(rho.entries.imag, imag_path, seed)
    return [real_path, imag_path]


def report_payload(report: PipelineReport) -> dict[str, Any]:
    """Return the report as plain JSON-compatible data."""
    return report.model_dump(mode="json")

