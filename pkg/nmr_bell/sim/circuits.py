"""
Gate-level state preparation.

Provides the single-qubit rotations and CNOT on three qubits, the
preparation circuit for the symmetric |S⟩ state, the reference states used
throughout (GHZ, W, S, basis states) and the pseudopure-state model.

The |S⟩ circuit prepares qubit 1 with Ry(θ₁), θ₁ = 2·arccos(1/√3), then a
uniformly controlled Ry on qubit 2 (two CNOTs around Ry(11π/12), Ry(−5π/12)),
and fixes the parity of qubit 3 with CNOT(2,3), CNOT(1,3) and an X flip.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
import logging
import math

import numpy as np

from ..const import (
    DEFAULT_EPSILON,
    DIM,
    NUM_QUBITS,
    REFERENCE_THETA_1,
    REFERENCE_THETA_2,
    REFERENCE_THETA_3,
    UNITARY_TOL,
)
from .constants import GateKind
from .exceptions import ValidationError
from .models import Circuit, Gate
from .qstate import (
    ComplexArray,
    DensityMatrix,
    StateVector,
    embed,
    is_unitary,
)

_LOGGER = logging.getLogger(__name__)

_PAULI_MATRICES = {
    GateKind.RX: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    GateKind.RY: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    GateKind.RZ: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
_P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
_X = _PAULI_MATRICES[GateKind.RX]

S_THETA_1 = 2 * math.acos(1 / math.sqrt(3))
S_THETA_2 = 11 * math.pi / 12
S_THETA_3 = -5 * math.pi / 12


class ReferenceState(StrEnum):
    """Named reference states."""

    GHZ = "GHZ"
    W = "W"
    S = "S"


def rotation_matrix(axis: GateKind, angle: float) -> ComplexArray:
    """Return exp(−i·angle·σ/2) for axis x, y or z."""
    if axis not in _PAULI_MATRICES:
        raise ValidationError(f"{axis} is not a rotation axis")
    sigma = _PAULI_MATRICES[axis]
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sigma


def cnot_matrix(control: int, target: int, num_qubits: int = NUM_QUBITS) -> ComplexArray:
    """Return the CNOT unitary on the full register."""
    if control == target:
        raise ValidationError("CNOT control and target must differ")
    return embed(_P0, control, num_qubits) + embed(_P1, control, num_qubits) @ embed(
        _X, target, num_qubits
    )


def _custom_matrix(gate: Gate) -> ComplexArray:
    """Lift a custom gate on its listed targets to the full register."""
    u = gate.unitary()
    k = len(gate.targets)
    others = [q for q in range(1, NUM_QUBITS + 1) if q not in gate.targets]
    full = np.kron(u, np.eye(2 ** (NUM_QUBITS - k)))
    # Permute from (targets..., others...) ordering back to qubit order.
    order = [*gate.targets, *others]
    perm = [order.index(q) for q in range(1, NUM_QUBITS + 1)]
    t = full.reshape([2] * (2 * NUM_QUBITS))
    t = t.transpose(perm + [p + NUM_QUBITS for p in perm])
    return t.reshape(DIM, DIM)


def gate_matrix(gate: Gate) -> ComplexArray:
    """Return the 8×8 unitary of a gate."""
    if gate.gate == GateKind.CNOT:
        return cnot_matrix(gate.control, gate.target)
    if gate.gate == GateKind.CUSTOM:
        return _custom_matrix(gate)
    if gate.angle is None:
        raise ValidationError(f"{gate.gate} gate without angle")
    return embed(rotation_matrix(gate.gate, gate.angle), gate.target)


def circuit_unitary(circuit: Circuit) -> ComplexArray:
    """Return U_s = U_N ··· U_1 for the circuit."""
    u = np.eye(DIM, dtype=np.complex128)
    for gate in circuit.gates:
        u = gate_matrix(gate) @ u
    if not is_unitary(u, UNITARY_TOL * max(1, len(circuit.gates))):
        raise ValidationError("circuit unitary failed the U†U = I check")
    return u


def apply_circuit[T: (StateVector, DensityMatrix)](circuit: Circuit, state: T) -> T:
    """
    Apply a circuit to a pure or mixed state.

    Returns U|ψ⟩ for state vectors and UρU† for density matrices.
    """
    u = circuit_unitary(circuit)
    if isinstance(state, StateVector):
        out = u @ state.amplitudes
        return StateVector(out / np.linalg.norm(out))  # type: ignore[return-value]
    rho = u @ state.entries @ u.conj().T
    return DensityMatrix((rho + rho.conj().T) / 2)  # type: ignore[return-value]


def rx(qubit: int, angle: float) -> Gate:
    """Build an x rotation."""
    return Gate(gate=GateKind.RX, targets=(qubit,), angle=angle)


def ry(qubit: int, angle: float) -> Gate:
    """Build a y rotation."""
    return Gate(gate=GateKind.RY, targets=(qubit,), angle=angle)


def rz(qubit: int, angle: float) -> Gate:
    """Build a z rotation."""
    return Gate(gate=GateKind.RZ, targets=(qubit,), angle=angle)


def cnot(control: int, target: int) -> Gate:
    """Build a CNOT."""
    return Gate(gate=GateKind.CNOT, targets=(control, target))


def reference_angles() -> dict[str, tuple[float, float]]:
    """
    Return (printed, synthesized) for each Ry angle of the |S⟩ circuit.

    The printed θ₁ is rounded to 1.216·π/2; the printed θ₃ carries no sign.
    """
    return {
        "theta_1": (REFERENCE_THETA_1, S_THETA_1),
        "theta_2": (REFERENCE_THETA_2, S_THETA_2),
        "theta_3": (REFERENCE_THETA_3, S_THETA_3),
    }


def s_prep_circuit() -> Circuit:
    """
    Return a four-CNOT circuit mapping |000⟩ to |S⟩ up to global phase.

    The two Ry angles on qubit 2 are the 11π/12 and 5π/12 of the reference
    pulse sequence; the qubit 1 angle is 2·arccos(1/√3) ≈ 1.2163·π/2.
    """
    circuit = Circuit(
        gates=(
            ry(1, S_THETA_1),
            ry(2, S_THETA_2),
            cnot(1, 2),
            ry(2, S_THETA_3),
            cnot(1, 2),
            cnot(2, 3),
            cnot(1, 3),
            rx(3, math.pi),
        )
    )
    _LOGGER.debug(
        "S preparation circuit: %d CNOTs, %d rotations",
        circuit.cnot_count,
        circuit.rotation_count,
    )
    return circuit


def ghz_circuit() -> Circuit:
    """Return a Hadamard-equivalent plus CNOT cascade preparing GHZ from |000⟩."""
    return Circuit(gates=(rz(1, math.pi), ry(1, math.pi / 2), cnot(1, 2), cnot(1, 3)))


def reference_state(name: ReferenceState | str, index: int | None = None) -> StateVector:
    """
    Return a canonical reference state.

    Args:
        name: ``GHZ``, ``W``, ``S``, or ``basis`` together with ``index``.
        index: Basis index 0–7 when ``name`` is ``basis``.

    Raises:
        ValidationError: For an unknown name.

    """
    amps = np.zeros(DIM, dtype=np.complex128)
    if str(name).lower() == "basis":
        if index is None:
            raise ValidationError("basis reference state needs an index")
        return StateVector.basis(index)
    try:
        ref = ReferenceState(str(name).upper())
    except ValueError as err:
        raise ValidationError(f"unknown reference state {name!r}") from err
    match ref:
        case ReferenceState.GHZ:
            amps[0b000] = amps[0b111] = 1 / math.sqrt(2)
        case ReferenceState.W:
            amps[0b001] = amps[0b010] = amps[0b100] = 1 / math.sqrt(3)
        case ReferenceState.S:
            amps[0b001] = amps[0b010] = 1 / math.sqrt(6)
            amps[0b100] = -1 / math.sqrt(6)
            amps[0b111] = 1 / math.sqrt(2)
    return StateVector(amps)


@dataclass(frozen=True, slots=True)
class PseudopureSpec:
    """ε-weighted mixture of a pure core state with I/8."""

    core: StateVector
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        """Validate the polarization."""
        if not 0.0 < self.epsilon <= 1.0:
            raise ValidationError(f"epsilon {self.epsilon} outside (0, 1]")
        if self.core.dim != DIM:
            raise ValidationError("pseudopure core must be a three-qubit state")


def pseudopure_density(spec: PseudopureSpec) -> DensityMatrix:
    """Return (1−ε)/8·I₈ + ε|ψ⟩⟨ψ|."""
    projector = np.outer(spec.core.amplitudes, spec.core.amplitudes.conj())
    return DensityMatrix(
        (1 - spec.epsilon) / DIM * np.eye(DIM, dtype=np.complex128)
        + spec.epsilon * projector
    )
