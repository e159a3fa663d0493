"""Fixtures for nmr-bell tests."""

from __future__ import annotations

from collections.abc import Generator
import logging

import numpy as np
import pytest

from nmr_bell.config import PipelineConfig
from nmr_bell.const import DOMAIN
from nmr_bell.sim.circuits import ReferenceState, reference_state
from nmr_bell.sim.models import SpinSystem
from nmr_bell.sim.qstate import DensityMatrix, StateVector

from .const import MOCK_CONFIG


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def s_state() -> StateVector:
    """Return |S⟩."""
    return reference_state(ReferenceState.S)


@pytest.fixture
def s_density(s_state: StateVector) -> DensityMatrix:
    """Return |S⟩⟨S|."""
    return s_state.density()


@pytest.fixture
def ghz_density() -> DensityMatrix:
    """Return the GHZ projector."""
    return reference_state(ReferenceState.GHZ).density()


@pytest.fixture
def w_density() -> DensityMatrix:
    """Return the W projector."""
    return reference_state(ReferenceState.W).density()


@pytest.fixture
def spin_system() -> SpinSystem:
    """Return the default three-spin system."""
    return SpinSystem()


@pytest.fixture
def offset_system() -> SpinSystem:
    """Return a spin system with non-zero offsets."""
    return SpinSystem(offsets=(120.0, -75.0, 40.0))


@pytest.fixture
def mock_config(tmp_path) -> PipelineConfig:
    """Return a fast pipeline configuration writing into tmp_path."""
    return PipelineConfig.from_dict({**MOCK_CONFIG, "output_dir": str(tmp_path / "out")})


@pytest.fixture(autouse=True)
def restore_package_logger() -> Generator[None]:
    """Undo handler changes the CLI makes to the package logger."""
    logger = logging.getLogger(DOMAIN)
    saved = (logger.handlers[:], logger.level, logger.propagate)
    yield
    logger.handlers[:], logger.level, logger.propagate = saved[0], saved[1], saved[2]
