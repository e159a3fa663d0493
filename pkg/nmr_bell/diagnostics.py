"""Diagnostics dump of a pipeline run."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np

from .const import REPORT_SCHEMA_VERSION

if TYPE_CHECKING:
    from .pipeline import Pipeline


def _serialize_data(data: Any) -> Any:
    """Serialize Pydantic models, dataclasses and arrays to JSON-friendly data."""
    if data is None:
        return None

    if hasattr(data, "model_dump"):
        return data.model_dump(mode="json")

    if hasattr(data, "__dataclass_fields__"):
        return {
            name: _serialize_data(getattr(data, name))
            for name in data.__dataclass_fields__
        }

    if isinstance(data, np.ndarray):
        if np.iscomplexobj(data):
            return _serialize_data(np.stack([data.real, data.imag], axis=-1))
        return data.tolist()

    if isinstance(data, complex | np.complexfloating):
        return [float(data.real), float(data.imag)]

    if isinstance(data, np.generic):
        return data.item()

    if isinstance(data, Enum):
        return data.value

    if isinstance(data, Path):
        return str(data)

    if isinstance(data, list | tuple):
        return [_serialize_data(item) for item in data]

    # Tuple keys such as qubit pairs become "12"
    if isinstance(data, dict):
        return {
            "".join(map(str, key)) if isinstance(key, tuple) else str(key): _serialize_data(value)
            for key, value in data.items()
        }

    return data


def get_pipeline_diagnostics(pipeline: Pipeline) -> dict[str, Any]:
    """Return configuration, solver health and every intermediate product."""
    data = pipeline.data
    reconstruction = data.reconstruction
    grape = data.grape
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": pipeline.config.model_dump(mode="json"),
        "functional": pipeline.functional.model_dump(mode="json"),
        "solver_health": {
            "tomography_converged": reconstruction.converged if reconstruction else None,
            "tomography_iterations": reconstruction.iterations if reconstruction else None,
            "grape_converged": grape.converged if grape else None,
            "grape_message": grape.message if grape else None,
        },
        "data": _serialize_data(data),
    }
