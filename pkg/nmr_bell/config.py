"""Pipeline configuration."""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from .const import (
    DEFAULT_EPSILON,
    DEFAULT_GRAPE_MAX_ITERS,
    DEFAULT_GRAPE_SEGMENTS,
    DEFAULT_GRAPE_TARGET_FIDELITY,
    DEFAULT_J12,
    DEFAULT_SWEEP_POINTS,
    TOMOGRAPHY_SETTINGS,
)
from .sim.bell import MeasurementSettings, observable
from .sim.constants import (
    FidelityConvention,
    GrapeMethod,
    NegativityConvention,
    Party,
    StateSource,
)
from .sim.exceptions import ConfigError
from .sim.models import NoiseChannel, SpinSystem

_LOGGER = logging.getLogger(__name__)


class StateConfig(BaseModel):
    """Where the analyzed state comes from."""

    source: StateSource = Field(StateSource.CIRCUIT, description="State source")
    path: Path | None = Field(None, description="Density matrix JSON for source=file")
    spin_system: SpinSystem = Field(
        default_factory=SpinSystem, description="Spin system for source=pulse"
    )

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _path_for_file(self) -> Self:
        if self.source == StateSource.FILE:
            if self.path is None:
                raise ValueError("state.path is required when state.source is 'file'")
            if not self.path.is_file():
                raise ValueError(f"state file {self.path} does not exist")
        return self


class TomographyConfig(BaseModel):
    """Readout settings and noise."""

    enabled: bool = Field(True, description="Run simulated tomography")
    settings: tuple[str, ...] = Field(TOMOGRAPHY_SETTINGS, description="Setting labels")
    sigma: float = Field(0.0, ge=0.0, description="Readout noise std")
    seed: int | None = Field(None, ge=0, description="Readout noise seed")

    model_config = {"frozen": True, "extra": "forbid"}


class BellConfig(BaseModel):
    """
    Measurement settings and sweep.

    ``angles`` sets each observable to cos θ·σz + sin θ·σx; slots left out
    keep σz for setting 0 and σx for setting 1.
    """

    functional_path: Path | None = Field(None, description="Bell functional text file")
    angles: dict[Literal["a0", "a1", "b0", "b1", "c0", "c1"], float] = Field(
        default_factory=dict, description="Observable angles in radians"
    )
    sweep_party: Party = Field(Party.A, description="Party of the swept observable")
    sweep_which: Literal[0, 1] = Field(1, description="Setting of the swept observable")
    sweep_points: int = Field(DEFAULT_SWEEP_POINTS, ge=2, description="Sweep grid size")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _functional_exists(self) -> Self:
        if self.functional_path is not None and not self.functional_path.is_file():
            raise ValueError(f"functional file {self.functional_path} does not exist")
        return self

    def measurement_settings(self) -> MeasurementSettings:
        """Return the configured settings."""
        settings = MeasurementSettings.maximal()
        for slot, theta in self.angles.items():
            settings = settings.with_observable(
                Party(slot[0].upper()), int(slot[1]), observable(theta)
            )
        return settings


class AnalysisConfig(BaseModel):
    """Reporting conventions."""

    negativity_convention: NegativityConvention = NegativityConvention.DOUBLED
    fidelity_convention: FidelityConvention = FidelityConvention.ROOT
    pps_mode: bool = Field(False, description="Report Bell values on the pseudopure state")
    epsilon: float = Field(DEFAULT_EPSILON, gt=0.0, le=1.0, description="PPS polarization")
    reference_fit: bool = Field(True, description="Compare with experimental values")

    model_config = {"frozen": True, "extra": "forbid"}


class GrapeConfig(BaseModel):
    """Optional GRAPE optimization of a CNOT."""

    enabled: bool = False
    control: int = Field(1, ge=1, le=3)
    target: int = Field(2, ge=1, le=3)
    segments: int = Field(DEFAULT_GRAPE_SEGMENTS, ge=1)
    duration: float = Field(1.5 / DEFAULT_J12, gt=0.0, description="Seconds")
    max_iters: int = Field(DEFAULT_GRAPE_MAX_ITERS, ge=1)
    target_fidelity: float = Field(DEFAULT_GRAPE_TARGET_FIDELITY, gt=0.0, le=1.0)
    method: GrapeMethod = GrapeMethod.LBFGS
    restarts: int = Field(1, ge=1)
    seed: int | None = Field(None, ge=0)

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _distinct(self) -> Self:
        if self.control == self.target:
            raise ValueError("grape control and target must differ")
        return self


class PipelineConfig(BaseModel):
    """
    Full pipeline configuration.

    Unknown keys are rejected at every level. A seed is required whenever
    readout noise is enabled; ``tomography.seed`` falls back to ``seed``.

    Example:
        >>> PipelineConfig.from_file(Path("config/pipeline.json"))

    """

    seed: int | None = Field(None, ge=0, description="Root seed for all randomness")
    state: StateConfig = Field(default_factory=StateConfig)
    noise: NoiseChannel | None = Field(None, description="Channel applied to the state")
    tomography: TomographyConfig = Field(default_factory=TomographyConfig)
    bell: BellConfig = Field(default_factory=BellConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    grape: GrapeConfig = Field(default_factory=GrapeConfig)
    output_dir: Path = Field(Path("out"), description="Directory for output files")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _reproducible(self) -> Self:
        if self.tomography.sigma > 0 and self.tomography_seed is None:
            raise ValueError("a seed is required when tomography.sigma > 0")
        if self.analysis.pps_mode and self.state.source not in (
            StateSource.CIRCUIT,
            StateSource.PULSE,
        ):
            raise ValueError("pps_mode needs a pure prepared state (circuit or pulse)")
        if not all(math.isfinite(v) for v in self.bell.angles.values()):
            raise ValueError("bell angles must be finite")
        return self

    @property
    def tomography_seed(self) -> int | None:
        """Seed for readout noise."""
        return self.tomography.seed if self.tomography.seed is not None else self.seed

    @property
    def grape_seed(self) -> int:
        """Seed for GRAPE initial controls."""
        if self.grape.seed is not None:
            return self.grape.seed
        return self.seed if self.seed is not None else 0

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> PipelineConfig:
        """
        Validate a configuration mapping.

        Raises:
            ConfigError: With every validation problem in the message.

        """
        try:
            return cls.model_validate(payload)
        except PydanticValidationError as err:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in e['loc']) or '<root>'}: {e['msg']}"
                for e in err.errors()
            )
            raise ConfigError(f"invalid configuration: {problems}") from err

    @classmethod
    def from_file(cls, path: Path) -> PipelineConfig:
        """
        Load a JSON configuration file.

        Relative paths inside the file are resolved against its directory.

        Raises:
            ConfigError: If the file is missing, unreadable, not valid JSON
                or fails validation.

        """
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"{path}: cannot read configuration ({err.strerror})") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: invalid JSON ({err})") from err
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: configuration must be a JSON object")
        base = path.parent
        for section, key in (("state", "path"), ("bell", "functional_path")):
            block = payload.get(section)
            if not isinstance(block, dict):
                continue
            value = block.get(key)
            if isinstance(value, str) and not Path(value).is_absolute():
                block[key] = str(base / value)
        _LOGGER.debug("Loaded configuration from %s", path)
        return cls.from_dict(payload)

    def with_overrides(
        self, seed: int | None = None, output_dir: Path | None = None
    ) -> PipelineConfig:
        """Return a revalidated copy with CLI overrides applied."""
        payload = self.model_dump()
        if seed is not None:
            payload["seed"] = seed
        if output_dir is not None:
            payload["output_dir"] = output_dir
        return self.from_dict(payload)
