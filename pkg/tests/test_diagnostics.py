"""Test the pipeline diagnostics dump."""

from __future__ import annotations

from dataclasses import dataclass
import json
from pathlib import Path

import numpy as np
import pytest

from nmr_bell.config import PipelineConfig
from nmr_bell.diagnostics import _serialize_data, get_pipeline_diagnostics
from nmr_bell.pipeline import Pipeline
from nmr_bell.sim.constants import Party
from nmr_bell.sim.models import SpinSystem


def test_serialize_data_none() -> None:
    """Test serialization of None."""
    assert _serialize_data(None) is None


def test_serialize_data_primitive() -> None:
    """Test serialization of primitive types."""
    assert _serialize_data(42) == 42
    assert _serialize_data("test") == "test"
    assert _serialize_data(3.14) == 3.14
    bool_value = True
    assert _serialize_data(bool_value) is True


def test_serialize_data_numpy() -> None:
    """Test arrays and scalars become plain lists and numbers."""
    assert _serialize_data(np.array([1.0, 2.0])) == [1.0, 2.0]
    assert _serialize_data(np.float64(0.5)) == 0.5
    assert _serialize_data(np.array([1 + 2j])) == [[1.0, 2.0]]
    assert _serialize_data(3 - 1j) == [3.0, -1.0]


def test_serialize_data_containers() -> None:
    """Test tuple keys join and nested values recurse."""
    result = _serialize_data({(1, 2): np.float64(0.25), "p": (Party.A, Path("x"))})
    assert result == {"12": 0.25, "p": ["A", "x"]}


def test_serialize_data_models() -> None:
    """Test pydantic models and dataclasses."""

    @dataclass
    class Holder:
        system: SpinSystem
        values: np.ndarray

    result = _serialize_data(Holder(SpinSystem(), np.zeros(2)))
    assert result["values"] == [0.0, 0.0]
    assert result["system"] == SpinSystem().model_dump(mode="json")


@pytest.mark.integration
def test_get_pipeline_diagnostics(mock_config: PipelineConfig) -> None:
    """Test the dump covers config, solver health and intermediates."""
    pipeline = Pipeline(mock_config)
    pipeline.run()
    diagnostics = get_pipeline_diagnostics(pipeline)
    assert diagnostics["functional"]["name"] == "T26"
    assert diagnostics["solver_health"]["grape_converged"] is None
    assert len(diagnostics["data"]["records"]) == 7
    assert len(diagnostics["data"]["analyzed"]["entries"]) == 8
    assert diagnostics["data"]["concurrences"].keys() == {"12", "13", "23"}
    json.dumps(diagnostics)


def test_diagnostics_before_run(mock_config: PipelineConfig) -> None:
    """Test an unrun pipeline dumps empty intermediates."""
    diagnostics = get_pipeline_diagnostics(Pipeline(mock_config))
    assert diagnostics["data"]["prepared"] is None
    assert diagnostics["solver_health"]["tomography_converged"] is None
