"""
Seven-setting NMR tomography.

Each setting applies spin-selective π/2 pulses (X about x, Y about y, I
nothing) and then reads the twelve single-quantum amplitudes
ρ′[1s, 0s]: four lines per spin, one per state s of the other two spins.
Reconstruction is least squares over Hermitian unit-trace matrices with the
PSD constraint enforced by projection at every iterate.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import functools
import itertools
import logging
import math

import numpy as np

from ..const import (
    DEFAULT_RECONSTRUCT_MAX_ITERS,
    DEFAULT_RECONSTRUCT_TOL,
    DIM,
    NUM_QUBITS,
    RANK_RTOL,
    TOMOGRAPHY_SETTINGS,
)
from .circuits import rotation_matrix
from .constants import GateKind
from .exceptions import InformationallyIncompleteError, ValidationError
from .models import MeasurementRecord
from .qstate import ComplexArray, DensityMatrix, RealArray, kron_all, pauli_string

_LOGGER = logging.getLogger(__name__)

NUM_AMPLITUDES = 12
NUM_PARAMETERS = DIM * DIM

_PULSES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": rotation_matrix(GateKind.RX, math.pi / 2),
    "Y": rotation_matrix(GateKind.RY, math.pi / 2),
}


def _readout_indices() -> tuple[tuple[int, int], ...]:
    """(row, column) of ρ′ for each of the twelve amplitudes, in record order."""
    pairs: list[tuple[int, int]] = []
    for spin in range(NUM_QUBITS):
        others = [q for q in range(NUM_QUBITS) if q != spin]
        for config in itertools.product((0, 1), repeat=NUM_QUBITS - 1):
            bits = [0] * NUM_QUBITS
            for q, b in zip(others, config, strict=True):
                bits[q] = b
            bits[spin] = 1
            row = int("".join(map(str, bits)), 2)
            bits[spin] = 0
            col = int("".join(map(str, bits)), 2)
            pairs.append((row, col))
    return tuple(pairs)


_ROWS, _COLS = (np.array(ix) for ix in zip(*_readout_indices(), strict=True))


@dataclass(frozen=True, slots=True)
class TomographySetting:
    """A readout setting named by a three-letter label over I, X, Y."""

    label: str

    def __post_init__(self) -> None:
        """Normalize and validate the label."""
        label = self.label.upper()
        if len(label) != NUM_QUBITS or any(ch not in _PULSES for ch in label):
            raise ValidationError(f"setting label {self.label!r} must be three of I, X, Y")
        object.__setattr__(self, "label", label)

    @property
    def canonical(self) -> bool:
        """True for the seven settings of the standard protocol."""
        return self.label in TOMOGRAPHY_SETTINGS

    def unitary(self) -> ComplexArray:
        """Return the product of spin-selective pulses, position k on spin k."""
        return _setting_unitary(self.label)


@functools.cache
def _setting_unitary(label: str) -> ComplexArray:
    u = kron_all([_PULSES[ch] for ch in label])
    u.setflags(write=False)
    return u


def canonical_settings() -> list[TomographySetting]:
    """Return the seven standard settings in protocol order."""
    return [TomographySetting(label) for label in TOMOGRAPHY_SETTINGS]


def readout_amplitudes(matrix: ComplexArray, setting: TomographySetting) -> ComplexArray:
    """Return the twelve amplitudes of UMU† for any 8×8 matrix M."""
    u = setting.unitary()
    rotated = u @ matrix @ u.conj().T
    return rotated[_ROWS, _COLS]


def simulate_readout(
    rho: DensityMatrix,
    setting: TomographySetting | str,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> MeasurementRecord:
    """
    Simulate one setting, adding i.i.d. Gaussian noise to each quadrature.

    Raises:
        ValidationError: If ``noise_sigma`` is negative or noise is requested
            without a seed.

    """
    if isinstance(setting, str):
        setting = TomographySetting(setting)
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be non-negative")
    if noise_sigma > 0 and seed is None:
        raise ValidationError("noisy readout needs a seed")
    values = readout_amplitudes(rho.entries, setting)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, noise_sigma, size=(NUM_AMPLITUDES, 2))
        values = values + noise[:, 0] + 1j * noise[:, 1]
    return MeasurementRecord(
        setting=setting.label,
        amplitudes=tuple((float(v.real), float(v.imag)) for v in values),
        noise_sigma=noise_sigma,
        seed=seed,
    )


def simulate_protocol(
    rho: DensityMatrix,
    settings: Sequence[TomographySetting] | None = None,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> list[MeasurementRecord]:
    """
    Simulate every setting of a protocol.

    Each setting draws from its own child of ``seed`` so records are
    independent and reproducible.
    """
    settings = list(settings or canonical_settings())
    if noise_sigma > 0 and seed is None:
        raise ValidationError("noisy readout needs a seed")
    if seed is None:
        return [simulate_readout(rho, s) for s in settings]
    children = np.random.SeedSequence(seed).spawn(len(settings))
    return [
        simulate_readout(rho, s, noise_sigma, int(child.generate_state(1)[0]))
        for s, child in zip(settings, children, strict=True)
    ]


def average_records(
    runs: Sequence[Sequence[MeasurementRecord]],
) -> list[MeasurementRecord]:
    """
    Average repeated protocol runs setting by setting.

    The averaged records carry noise std σ/√k for k runs and the seed of the
    first run.

    Raises:
        ValidationError: If there are no runs or the runs use different settings.

    """
    if not runs:
        raise ValidationError("averaging needs at least one run")
    labels = [r.setting for r in runs[0]]
    if any([r.setting for r in run] != labels for run in runs[1:]):
        raise ValidationError("averaged runs must share their settings in order")
    k = len(runs)
    averaged = []
    for index, label in enumerate(labels):
        group = [run[index] for run in runs]
        mean = np.mean([record.values() for record in group], axis=0)
        sigma = float(np.mean([record.noise_sigma for record in group])) / math.sqrt(k)
        averaged.append(
            MeasurementRecord(
                setting=label,
                amplitudes=tuple((float(v.real), float(v.imag)) for v in mean),
                noise_sigma=sigma,
                seed=group[0].seed,
            )
        )
    return averaged


@functools.cache
def _pauli_basis() -> tuple[ComplexArray, ...]:
    """The 64 Pauli strings with III first; ρ = Σ r_j P_j / 8."""
    labels = ("".join(p) for p in itertools.product("IXYZ", repeat=NUM_QUBITS))
    return tuple(pauli_string(label).entries for label in labels)


@functools.cache
def _pauli_stack() -> ComplexArray:
    stack = np.stack(_pauli_basis())
    stack.setflags(write=False)
    return stack


def to_pauli_coordinates(matrix: ComplexArray) -> RealArray:
    """Return r_j = Tr(P_j M) for a Hermitian matrix."""
    return np.einsum("jab,ba->j", _pauli_stack(), matrix).real


def from_pauli_coordinates(coords: RealArray) -> ComplexArray:
    """Return Σ r_j P_j / 8."""
    return np.einsum("j,jab->ab", coords, _pauli_stack()) / DIM


@dataclass(frozen=True, slots=True)
class SensingMatrix:
    """
    Linear map from Pauli coordinates to stacked readout quadratures.

    ``rank`` is the numerical rank on the traceless coordinates;
    ``rank_with_trace`` adjoins the trace constraint.
    """

    matrix: RealArray
    rank: int
    rank_with_trace: int

    @property
    def complete(self) -> bool:
        """True when the design determines every unit-trace Hermitian matrix."""
        return self.rank_with_trace == NUM_PARAMETERS


def _numerical_rank(m: RealArray) -> int:
    singular = np.linalg.svd(m, compute_uv=False)
    if singular.size == 0 or singular[0] == 0:
        return 0
    return int(np.sum(singular > RANK_RTOL * singular[0]))


def sensing_matrix(settings: Sequence[TomographySetting | str]) -> SensingMatrix:
    """
    Build the sensing matrix of a list of settings.

    Rows are the real parts then the imaginary parts of each setting's twelve
    amplitudes; columns are the 64 Pauli coordinates.
    """
    if not settings:
        raise ValidationError("sensing matrix needs at least one setting")
    blocks = []
    for raw in settings:
        setting = raw if isinstance(raw, TomographySetting) else TomographySetting(raw)
        columns = np.stack(
            [readout_amplitudes(p / DIM, setting) for p in _pauli_basis()], axis=1
        )
        blocks.extend((columns.real, columns.imag))
    matrix = np.vstack(blocks)
    trace_row = np.zeros((1, NUM_PARAMETERS))
    trace_row[0, 0] = 1.0
    return SensingMatrix(
        matrix=matrix,
        rank=_numerical_rank(matrix[:, 1:]),
        rank_with_trace=_numerical_rank(np.vstack([matrix, trace_row])),
    )


def project_to_simplex(values: RealArray) -> RealArray:
    """Euclidean projection onto {x ≥ 0, Σx = 1}."""
    ordered = np.sort(values)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    index = np.arange(1, values.size + 1)
    k = index[ordered - cumulative / index > 0][-1]
    shift = cumulative[k - 1] / k
    return np.clip(values - shift, 0.0, None)


def project_to_density(matrix: ComplexArray) -> ComplexArray:
    """Frobenius-nearest PSD unit-trace matrix to a Hermitian matrix."""
    hermitian = (matrix + matrix.conj().T) / 2
    values, vectors = np.linalg.eigh(hermitian)
    return (vectors * project_to_simplex(values)) @ vectors.conj().T


@dataclass(frozen=True, slots=True)
class ReconstructionResult:
    """Constrained least-squares estimate and solver status."""

    rho_hat: DensityMatrix
    residual: float
    iterations: int
    converged: bool


def _stack_records(records: Sequence[MeasurementRecord]) -> tuple[SensingMatrix, RealArray]:
    if not records:
        raise ValidationError("reconstruction needs at least one record")
    sensing = sensing_matrix([r.setting for r in records])
    values = []
    for record in records:
        amps = record.values()
        values.extend((amps.real, amps.imag))
    return sensing, np.concatenate(values)


def residual(rho: DensityMatrix, records: Sequence[MeasurementRecord]) -> float:
    """Return Σ |predicted − recorded|² over all quadratures."""
    sensing, data = _stack_records(records)
    r = to_pauli_coordinates(rho.entries)
    return float(np.sum((sensing.matrix @ r - data) ** 2))


def reconstruct(
    records: Sequence[MeasurementRecord],
    tol: float = DEFAULT_RECONSTRUCT_TOL,
    max_iters: int = DEFAULT_RECONSTRUCT_MAX_ITERS,
) -> ReconstructionResult:
    """
    Reconstruct a density matrix from readout records.

    Starts from the unconstrained least-squares solution with the trace
    fixed, then runs accelerated projected gradient with adaptive restart.
    Every iterate is a valid density matrix. Stops when successive iterates
    differ by less than ``tol`` in Frobenius norm.

    Raises:
        InformationallyIncompleteError: If the settings cannot determine
            every unit-trace Hermitian matrix.

    """
    sensing, data = _stack_records(records)
    if not sensing.complete:
        raise InformationallyIncompleteError(
            f"informationally incomplete: rank {sensing.rank_with_trace} < {NUM_PARAMETERS}",
            rank=sensing.rank_with_trace,
        )
    a = sensing.matrix
    coords = np.zeros(NUM_PARAMETERS)
    coords[0] = 1.0
    coords[1:] = np.linalg.lstsq(a[:, 1:], data - a[:, 0], rcond=None)[0]

    def project(r: RealArray) -> RealArray:
        return to_pauli_coordinates(project_to_density(from_pauli_coordinates(r)))

    step = 1.0 / float(np.linalg.norm(a, 2) ** 2)
    x = project(coords)
    y = x.copy()
    momentum = 1.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        x_new = project(y - step * a.T @ (a @ y - data))
        # Pauli coordinates scale Frobenius distance by √8.
        change = float(np.linalg.norm(x_new - x)) / math.sqrt(DIM)
        if change < tol:
            x = x_new
            converged = True
            break
        if np.dot(y - x_new, x_new - x) > 0:
            momentum = 1.0
            y = x_new.copy()
        else:
            momentum_next = (1 + math.sqrt(1 + 4 * momentum**2)) / 2
            y = x_new + (momentum - 1) / momentum_next * (x_new - x)
            momentum = momentum_next
        x = x_new
    rho = project_to_density(from_pauli_coordinates(x))
    rho_hat = DensityMatrix(rho / np.trace(rho).real)
    res = float(np.sum((a @ to_pauli_coordinates(rho_hat.entries) - data) ** 2))
    if converged:
        _LOGGER.debug("Reconstruction converged in %d iterations", iterations)
    else:
        _LOGGER.warning(
            "Reconstruction stopped after %d iterations without converging", iterations
        )
    return ReconstructionResult(
        rho_hat=rho_hat, residual=res, iterations=iterations, converged=converged
    )
