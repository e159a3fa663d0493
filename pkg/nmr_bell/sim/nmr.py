"""
Pulse-level physics for the three-spin register.

The rotating-frame Hamiltonian is

    H = −Σᵢ (ωᵢ − ω_RF) I_iz + Σ_{i>j} 2π J_ij I_iz I_jz

with I = σ/2. RF events are hard (instantaneous) rotations by default, or
finite pulses evolved jointly with H. A pulse program is an ordered event
list plus the diagonal z corrections it still owes; z rotations are never
absorbed silently.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.linalg import expm

from ..const import DIM, NUM_QUBITS
from .circuits import cnot_matrix, rotation_matrix
from .constants import EventKind, GateKind, PulseModel
from .exceptions import ValidationError
from .models import Circuit, PulseEvent, SpinSystem
from .qstate import (
    ComplexArray,
    DensityMatrix,
    HermitianOperator,
    embed,
    phase_insensitive_overlap,
)

_LOGGER = logging.getLogger(__name__)

_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128) / 2

_PAIRS = ((1, 2), (1, 3), (2, 3))

# RF phases for rotations about ±x and ±y
PHASE_X = 0.0
PHASE_Y = math.pi / 2
PHASE_MINUS_X = math.pi
PHASE_MINUS_Y = 3 * math.pi / 2


def spin_operator(axis: str, spin: int) -> ComplexArray:
    """Return I_{spin,axis} = σ_axis/2 on the three-spin register."""
    ops = {"x": _SX, "y": _SY, "z": _SZ}
    return embed(ops[axis], spin, NUM_QUBITS)


def hamiltonian(system: SpinSystem) -> HermitianOperator:
    """Return the diagonal rotating-frame Hamiltonian in rad/s."""
    h = np.zeros((DIM, DIM), dtype=np.complex128)
    for spin, offset in enumerate(system.offsets, start=1):
        h -= offset * spin_operator("z", spin)
    for i, j in _PAIRS:
        h += (
            2 * math.pi * system.coupling(i, j)
            * spin_operator("z", i) @ spin_operator("z", j)
        )
    return HermitianOperator(h, "H")


def rf_generator(targets: Iterable[int], phase: float) -> ComplexArray:
    """Return Σ_{targets} (cos φ I_x + sin φ I_y)."""
    g = np.zeros((DIM, DIM), dtype=np.complex128)
    for spin in targets:
        g += math.cos(phase) * spin_operator("x", spin)
        g += math.sin(phase) * spin_operator("y", spin)
    return g


def event_unitary(event: PulseEvent, system: SpinSystem) -> ComplexArray:
    """Return the propagator of a single event."""
    h_sys = hamiltonian(system).entries
    match event.kind:
        case EventKind.DELAY:
            diag = np.real(np.diag(h_sys))
            return np.diag(np.exp(-1j * diag * event.duration))
        case EventKind.RF if event.model == PulseModel.INSTANTANEOUS:
            return expm(-1j * event.angle * rf_generator(event.targets, event.phase))
        case EventKind.RF:
            nutation = event.angle / event.duration
            generator = h_sys + nutation * rf_generator(event.targets, event.phase)
            return expm(-1j * generator * event.duration)
    raise ValidationError(f"unknown event kind {event.kind!r}")


def sequence_unitary(
    events: Sequence[PulseEvent], system: SpinSystem
) -> ComplexArray:
    """Return U = U_n ··· U_1 for events in time order."""
    u = np.eye(DIM, dtype=np.complex128)
    for event in events:
        u = event_unitary(event, system) @ u
    return u


def evolve(
    events: Sequence[PulseEvent],
    system: SpinSystem,
    initial: DensityMatrix | ComplexArray,
) -> DensityMatrix | ComplexArray:
    """
    Propagate a state or a unitary accumulator through an event list.

    Args:
        events: Pulse events in time order.
        system: Spin system supplying the free-evolution Hamiltonian.
        initial: A density matrix (returns UρU†) or an 8×8 unitary
            accumulator (returns U·initial).

    """
    u = sequence_unitary(events, system)
    if isinstance(initial, DensityMatrix):
        rho = u @ initial.entries @ u.conj().T
        return DensityMatrix((rho + rho.conj().T) / 2)
    return u @ np.asarray(initial, dtype=np.complex128)


@dataclass(frozen=True, slots=True)
class PulseProgram:
    """
    Event list implementing a gate, plus the z corrections it owes.

    ``z_corrections`` maps spin → angle of an Rz that must follow the events
    for the program to equal its gate up to global phase.
    """

    events: tuple[PulseEvent, ...]
    z_corrections: dict[int, float] = field(default_factory=dict)
    label: str = ""

    @property
    def duration(self) -> float:
        """Total time in seconds."""
        return sum(e.duration for e in self.events)

    def correction_unitary(self) -> ComplexArray:
        """Return the diagonal correction ⊗ Rz(angle)."""
        u = np.eye(DIM, dtype=np.complex128)
        for spin, angle in self.z_corrections.items():
            u = embed(rotation_matrix(GateKind.RZ, angle), spin) @ u
        return u

    def corrected_unitary(self, system: SpinSystem) -> ComplexArray:
        """Return the program propagator followed by its z corrections."""
        return self.correction_unitary() @ sequence_unitary(self.events, system)


def rotation_events(spin: int, axis: GateKind, angle: float) -> list[PulseEvent]:
    """
    Lower a single-spin rotation to hard pulses.

    x and y rotations are one pulse; z rotations use the composite
    Rx(π/2)·Ry(α)·Rx(−π/2).
    """
    match axis:
        case GateKind.RX:
            return [PulseEvent.rf((spin,), angle, PHASE_X)]
        case GateKind.RY:
            return [PulseEvent.rf((spin,), angle, PHASE_Y)]
        case GateKind.RZ:
            return [
                PulseEvent.rf((spin,), math.pi / 2, PHASE_MINUS_X),
                PulseEvent.rf((spin,), angle, PHASE_Y),
                PulseEvent.rf((spin,), math.pi / 2, PHASE_X),
            ]
    raise ValidationError(f"{axis} is not a rotation axis")


def cnot_pulse_program(control: int, target: int, system: SpinSystem) -> PulseProgram:
    """
    J-coupling CNOT between two spins.

    Ry(−π/2) on the target, a 1/(2|J_ct|) coupling period, Ry(π/2) and
    Rx(∓π/2) on the target. Inside the coupling period π pulses on the third
    spin and on all spins refocus every offset and the couplings to the
    third spin, leaving exp(−i·sign(J)·π/4·Z_c Z_t). The program equals CNOT
    after an Rz(−sign(J)·π/2) on the control, reported in ``z_corrections``.

    Raises:
        ValidationError: If control equals target or J_ct is zero.

    """
    if control == target:
        raise ValidationError("CNOT control and target must differ")
    j_ct = system.coupling(control, target)
    if j_ct == 0:
        raise ValidationError(f"zero coupling between spins {control} and {target}")
    sign = 1.0 if j_ct > 0 else -1.0
    tau = system.refocus_delay(control, target)
    spectator = next(s for s in range(1, NUM_QUBITS + 1) if s not in (control, target))
    every = tuple(range(1, NUM_QUBITS + 1))
    quarter = PulseEvent.delay(tau / 4)
    events = (
        PulseEvent.rf((target,), math.pi / 2, PHASE_MINUS_Y),
        quarter,
        PulseEvent.rf((spectator,), math.pi, PHASE_X),
        quarter,
        PulseEvent.rf(every, math.pi, PHASE_X),
        quarter,
        PulseEvent.rf((spectator,), math.pi, PHASE_X),
        quarter,
        PulseEvent.rf(every, math.pi, PHASE_X),
        PulseEvent.rf((target,), math.pi / 2, PHASE_Y),
        PulseEvent.rf((target,), math.pi / 2, PHASE_MINUS_X if sign > 0 else PHASE_X),
    )
    return PulseProgram(
        events=events,
        z_corrections={control: -sign * math.pi / 2},
        label=f"cnot({control},{target})",
    )


def lower_circuit(circuit: Circuit, system: SpinSystem) -> PulseProgram:
    """
    Lower a gate circuit to a pulse program with no outstanding corrections.

    CNOT z corrections are realized as composite pulses right after each
    CNOT block.
    """
    events: list[PulseEvent] = []
    for gate in circuit.gates:
        if gate.gate == GateKind.CNOT:
            block = cnot_pulse_program(gate.control, gate.target, system)
            events.extend(block.events)
            for spin, angle in block.z_corrections.items():
                events.extend(rotation_events(spin, GateKind.RZ, angle))
        elif gate.gate == GateKind.CUSTOM:
            raise ValidationError("custom gates have no pulse lowering")
        else:
            events.extend(rotation_events(gate.target, gate.gate, gate.angle or 0.0))
    _LOGGER.debug(
        "Lowered %d gates to %d pulse events", len(circuit.gates), len(events)
    )
    return PulseProgram(events=tuple(events), label="lowered")


def cnot_process_fidelity(control: int, target: int, system: SpinSystem) -> float:
    """Return |Tr(CNOT†·U)|/8 for the corrected J-coupling CNOT program."""
    program = cnot_pulse_program(control, target, system)
    return phase_insensitive_overlap(
        cnot_matrix(control, target), program.corrected_unitary(system)
    )


def program_unitary(program: PulseProgram, system: SpinSystem) -> ComplexArray:
    """Return the corrected propagator of a pulse program."""
    return program.corrected_unitary(system)
