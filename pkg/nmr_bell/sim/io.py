"""
JSON and CSV codecs for simulator artifacts.

Complex numbers are written as ``[re, im]`` pairs. Floats go through
``repr`` so every value survives a write/read cycle exactly.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
import csv
import json
import logging
from pathlib import Path
from typing import Any, TextIO

import numpy as np
from pydantic import TypeAdapter
from pydantic import ValidationError as PydanticValidationError

from .bell import format_functional, parse_functional
from .exceptions import ValidationError
from .grape import NUM_CHANNELS
from .models import BellFunctional, Circuit, MeasurementRecord, PulseEvent
from .qstate import ComplexArray, DensityMatrix, RealArray, StateVector

_LOGGER = logging.getLogger(__name__)

_EVENTS = TypeAdapter(list[PulseEvent])
_RECORDS = TypeAdapter(list[MeasurementRecord])

CONTROL_COLUMNS: tuple[str, ...] = tuple(
    f"spin{spin}_{axis}" for spin in range(1, NUM_CHANNELS // 2 + 1) for axis in "xy"
)


def _pairs(values: Iterable[complex]) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in values]


def _complex(pairs: Sequence[Sequence[float]]) -> ComplexArray:
    try:
        return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
    except (TypeError, ValueError) as err:
        raise ValidationError(f"expected [re, im] pairs: {err}") from err


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: invalid JSON ({err})") from err


def _write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def density_to_json(rho: DensityMatrix) -> dict[str, Any]:
    """Encode a density matrix as ``{"dim": d, "entries": [[[re, im], ...], ...]}``."""
    return {"dim": rho.dim, "entries": [_pairs(row) for row in rho.entries]}


def density_from_json(payload: dict[str, Any]) -> DensityMatrix:
    """Decode a density matrix, checking ``dim`` against the entries."""
    try:
        rows = [_complex(row) for row in payload["entries"]]
        dim = int(payload["dim"])
    except (KeyError, TypeError) as err:
        raise ValidationError(f"density matrix JSON missing field: {err}") from err
    matrix = np.array(rows)
    if matrix.shape != (dim, dim):
        raise ValidationError(f"density matrix shape {matrix.shape} != dim {dim}")
    return DensityMatrix(matrix)


def state_to_json(state: StateVector) -> dict[str, Any]:
    """Encode a state vector as ``{"dim": d, "amplitudes": [[re, im], ...]}``."""
    return {"dim": state.dim, "amplitudes": _pairs(state.amplitudes)}


def state_from_json(payload: dict[str, Any]) -> StateVector:
    """Decode a state vector."""
    try:
        amps = _complex(payload["amplitudes"])
    except (KeyError, TypeError) as err:
        raise ValidationError(f"state JSON missing field: {err}") from err
    if amps.shape[0] != int(payload.get("dim", amps.shape[0])):
        raise ValidationError("state dim does not match amplitude count")
    return StateVector(amps)


def save_density(rho: DensityMatrix, path: Path, seed: int | None = None) -> None:
    """Write a density matrix JSON file stamped with the run seed."""
    _write_json(path, {**density_to_json(rho), "seed": seed})


def load_density(path: Path) -> DensityMatrix:
    """
    Read a density matrix or a pure state from JSON.

    Files carrying ``amplitudes`` are read as pure states.
    """
    payload = _read_json(path)
    if isinstance(payload, dict) and "amplitudes" in payload:
        return state_from_json(payload).density()
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return density_from_json(payload)


def save_circuit(circuit: Circuit, path: Path) -> None:
    """Write a circuit JSON file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(circuit.model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_circuit(path: Path) -> Circuit:
    """Read a circuit JSON file."""
    try:
        return Circuit.model_validate_json(path.read_text(encoding="utf-8"))
    except PydanticValidationError as err:
        raise ValidationError(f"{path}: invalid circuit ({err.error_count()} errors)") from err


def save_pulse_sequence(events: Sequence[PulseEvent], path: Path) -> None:
    """Write an ordered event array."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_EVENTS.dump_json(list(events), indent=2) + b"\n")


def load_pulse_sequence(path: Path) -> list[PulseEvent]:
    """Read an ordered event array."""
    try:
        return _EVENTS.validate_json(path.read_bytes())
    except PydanticValidationError as err:
        raise ValidationError(f"{path}: invalid pulse sequence ({err.error_count()} errors)") from err


def save_records(records: Sequence[MeasurementRecord], path: Path) -> None:
    """Write tomography records as a JSON array."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_RECORDS.dump_json(list(records), indent=2) + b"\n")


def load_records(path: Path) -> list[MeasurementRecord]:
    """Read tomography records."""
    try:
        return _RECORDS.validate_json(path.read_bytes())
    except PydanticValidationError as err:
        raise ValidationError(f"{path}: invalid records ({err.error_count()} errors)") from err


def save_functional(functional: BellFunctional, path: Path) -> None:
    """Write a Bell functional in text form."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_functional(functional), encoding="utf-8")


def load_functional(path: Path) -> BellFunctional:
    """Read a Bell functional in text form."""
    return parse_functional(path.read_text(encoding="utf-8"), name=path.stem)


def _write_seed_line(handle: TextIO, seed: int | None) -> None:
    handle.write(f"# seed={'none' if seed is None else seed}\n")


def _data_lines(handle: TextIO) -> list[str]:
    return [line for line in handle if not line.startswith("#")]


def write_controls_csv(controls: RealArray, path: Path, seed: int | None = None) -> None:
    """
    Write GRAPE controls, one row per segment.

    Every CSV starts with a ``# seed=<n>`` comment line (``none`` when unseeded).
    """
    array = np.asarray(controls, dtype=np.float64).reshape(-1, NUM_CHANNELS)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        _write_seed_line(handle, seed)
        writer = csv.writer(handle)
        writer.writerow(["segment", *CONTROL_COLUMNS])
        for index, row in enumerate(array):
            writer.writerow([index, *(repr(float(v)) for v in row)])


def read_controls_csv(path: Path) -> RealArray:
    """Read GRAPE controls written by ``write_controls_csv``."""
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(_data_lines(handle))
    header = next(reader, None)
    if header is None or tuple(header[1:]) != CONTROL_COLUMNS:
        raise ValidationError(f"{path}: missing or unexpected controls header")
    return np.array([[float(v) for v in row[1:]] for row in reader if row])


def write_matrix_csv(matrix: RealArray, path: Path, seed: int | None = None) -> None:
    """Write a real square matrix with basis labels 1..d on both axes."""
    dim = matrix.shape[0]
    labels = [str(i) for i in range(1, dim + 1)]
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        _write_seed_line(handle, seed)
        writer = csv.writer(handle)
        writer.writerow(["", *labels])
        for label, row in zip(labels, matrix, strict=True):
            writer.writerow([label, *(repr(float(v)) for v in row)])


def read_matrix_csv(path: Path) -> RealArray:
    """Read a matrix written by ``write_matrix_csv``."""
    with path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(_data_lines(handle)))
    return np.array([[float(v) for v in row[1:]] for row in rows[1:]])


def write_sweep_csv(
    rows: Iterable[tuple[float, float]], path: Path, seed: int | None = None
) -> None:
    """Write an incompatibility sweep as ``theta_rad,t26_value`` rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        _write_seed_line(handle, seed)
        writer = csv.writer(handle)
        writer.writerow(["theta_rad", "t26_value"])
        for theta, value in rows:
            writer.writerow([repr(float(theta)), repr(float(value))])
    _LOGGER.debug("Wrote sweep to %s", path)
