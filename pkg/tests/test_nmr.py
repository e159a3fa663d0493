"""Test the pulse-level spin dynamics."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from nmr_bell.sim.circuits import cnot_matrix, rotation_matrix, s_prep_circuit
from nmr_bell.sim.constants import EventKind, GateKind, PulseModel
from nmr_bell.sim.exceptions import ValidationError
from nmr_bell.sim.models import Circuit, Gate, PulseEvent, SpinSystem
from nmr_bell.sim.nmr import (
    PHASE_X,
    PHASE_Y,
    cnot_process_fidelity,
    cnot_pulse_program,
    event_unitary,
    evolve,
    hamiltonian,
    lower_circuit,
    program_unitary,
    rotation_events,
    sequence_unitary,
)
from nmr_bell.sim.qstate import (
    DensityMatrix,
    StateVector,
    embed,
    is_unitary,
    phase_insensitive_overlap,
)

ORDERED_PAIRS = list(itertools.permutations((1, 2, 3), 2))


class TestHamiltonian:
    """The rotating-frame Hamiltonian."""

    def test_diagonal(self, spin_system: SpinSystem) -> None:
        """Test H is diagonal in the computational basis."""
        h = hamiltonian(spin_system).entries
        assert np.allclose(h, np.diag(np.diag(h)))

    def test_coupling_energy(self) -> None:
        """Test |000⟩ carries 2π(J12 + J13 + J23)/4."""
        system = SpinSystem(j12=10.0, j13=20.0, j23=30.0)
        h = hamiltonian(system).entries
        assert h[0, 0].real == pytest.approx(2 * math.pi * 60.0 / 4)

    def test_offset_sign(self) -> None:
        """Test a positive offset lowers the |0⟩ energy of that spin."""
        system = SpinSystem(offsets=(100.0, 0.0, 0.0), j12=0.0, j13=0.0, j23=0.0)
        h = hamiltonian(system).entries
        assert h[0, 0].real == pytest.approx(-50.0)
        assert h[4, 4].real == pytest.approx(50.0)


class TestEvents:
    """Single pulse events."""

    def test_pi_pulse_about_x(self, spin_system: SpinSystem) -> None:
        """Test a hard π pulse about x is σx up to phase."""
        u = event_unitary(PulseEvent.rf((2,), math.pi, PHASE_X), spin_system)
        x2 = embed(np.array([[0, 1], [1, 0]]), 2)
        assert phase_insensitive_overlap(u, x2) == pytest.approx(1.0)

    def test_phase_selects_axis(self, spin_system: SpinSystem) -> None:
        """Test phase π/2 rotates about y."""
        u = event_unitary(PulseEvent.rf((1,), 0.7, PHASE_Y), spin_system)
        expected = embed(rotation_matrix(GateKind.RY, 0.7), 1)
        assert np.allclose(u, expected)

    def test_delay_is_diagonal_phase(self, spin_system: SpinSystem) -> None:
        """Test a delay commutes with Z and is unitary."""
        u = event_unitary(PulseEvent.delay(1e-3), spin_system)
        assert np.allclose(u, np.diag(np.diag(u)))
        assert is_unitary(u, 1e-12)

    def test_finite_pulse_approaches_hard_pulse(self, spin_system: SpinSystem) -> None:
        """Test a very short finite pulse matches the hard pulse."""
        hard = PulseEvent.rf((1, 2, 3), math.pi / 2, PHASE_X)
        soft = PulseEvent.rf(
            (1, 2, 3), math.pi / 2, PHASE_X, duration=1e-9, model=PulseModel.FINITE
        )
        assert phase_insensitive_overlap(
            event_unitary(hard, spin_system), event_unitary(soft, spin_system)
        ) == pytest.approx(1.0, abs=1e-9)

    def test_finite_pulse_needs_duration(self) -> None:
        """Test a finite pulse without duration is rejected."""
        with pytest.raises(ValueError, match="positive duration"):
            PulseEvent(kind=EventKind.RF, targets=(1,), angle=1.0, model=PulseModel.FINITE)

    def test_delay_takes_no_targets(self) -> None:
        """Test delays reject target spins."""
        with pytest.raises(ValueError, match="no targets"):
            PulseEvent(kind=EventKind.DELAY, targets=(1,), duration=1e-3)

    def test_rf_angles_wrap(self) -> None:
        """Test angle and phase are reduced mod 2π."""
        event = PulseEvent.rf((1,), 3 * math.pi, -math.pi / 2)
        assert event.angle == pytest.approx(math.pi)
        assert event.phase == pytest.approx(3 * math.pi / 2)

    @pytest.mark.parametrize("axis", [GateKind.RX, GateKind.RY, GateKind.RZ])
    def test_rotation_events(self, axis: GateKind) -> None:
        """Test lowered rotations match the gate, z via the composite pulse."""
        u = sequence_unitary(rotation_events(3, axis, 1.1), SpinSystem.zero())
        expected = embed(rotation_matrix(axis, 1.1), 3)
        assert phase_insensitive_overlap(u, expected) == pytest.approx(1.0, abs=1e-12)


class TestCnotProgram:
    """The J-coupling CNOT."""

    @pytest.mark.parametrize(("control", "target"), ORDERED_PAIRS)
    def test_every_ordered_pair(
        self, control: int, target: int, spin_system: SpinSystem
    ) -> None:
        """Test the corrected program equals CNOT for every pair."""
        assert cnot_process_fidelity(control, target, spin_system) == pytest.approx(
            1.0, abs=1e-10
        )

    def test_offsets_refocused(self, offset_system: SpinSystem) -> None:
        """Test chemical-shift offsets do not spoil the CNOT."""
        assert cnot_process_fidelity(1, 2, offset_system) == pytest.approx(1.0, abs=1e-10)

    def test_correction_reported(self, spin_system: SpinSystem) -> None:
        """Test the z correction sits on the control with sign of J."""
        positive = cnot_pulse_program(1, 2, spin_system)
        negative = cnot_pulse_program(2, 3, spin_system)
        assert positive.z_corrections == {1: pytest.approx(-math.pi / 2)}
        assert negative.z_corrections == {2: pytest.approx(math.pi / 2)}

    def test_uncorrected_program_differs(self, spin_system: SpinSystem) -> None:
        """Test the z correction is not absorbed silently."""
        program = cnot_pulse_program(1, 2, spin_system)
        raw = sequence_unitary(program.events, spin_system)
        assert phase_insensitive_overlap(cnot_matrix(1, 2), raw) < 0.9

    def test_duration_is_refocus_delay(self, spin_system: SpinSystem) -> None:
        """Test hard pulses take no time."""
        program = cnot_pulse_program(1, 3, spin_system)
        assert program.duration == pytest.approx(spin_system.refocus_delay(1, 3))

    def test_equal_qubits(self, spin_system: SpinSystem) -> None:
        """Test control equal to target raises."""
        with pytest.raises(ValidationError):
            cnot_pulse_program(2, 2, spin_system)

    def test_zero_coupling(self) -> None:
        """Test a missing coupling raises."""
        with pytest.raises(ValidationError):
            cnot_pulse_program(1, 2, SpinSystem(j12=0.0))


class TestLowering:
    """Circuit lowering and evolution."""

    def test_s_preparation_at_pulse_level(
        self, s_state: StateVector, offset_system: SpinSystem
    ) -> None:
        """Test the lowered S circuit prepares |S⟩."""
        program = lower_circuit(s_prep_circuit(), offset_system)
        assert not program.z_corrections
        prepared = program_unitary(program, offset_system) @ StateVector.basis(0).amplitudes
        assert abs(np.vdot(s_state.amplitudes, prepared)) == pytest.approx(1.0, abs=1e-10)

    def test_evolve_density(self, s_state: StateVector, spin_system: SpinSystem) -> None:
        """Test evolve on a density matrix."""
        program = lower_circuit(s_prep_circuit(), spin_system)
        rho = evolve(program.events, spin_system, StateVector.basis(0).density())
        assert isinstance(rho, DensityMatrix)
        assert np.real(np.vdot(s_state.amplitudes, rho.entries @ s_state.amplitudes)) == (
            pytest.approx(1.0, abs=1e-10)
        )

    def test_evolve_accumulator(self, spin_system: SpinSystem) -> None:
        """Test evolve on a unitary accumulator."""
        events = rotation_events(1, GateKind.RX, 0.4)
        out = evolve(events, spin_system, np.eye(8))
        assert np.allclose(out, sequence_unitary(events, spin_system))

    def test_custom_gate_not_lowered(self, spin_system: SpinSystem) -> None:
        """Test custom gates have no pulse form."""
        gate = Gate(gate=GateKind.CUSTOM, targets=(1,), matrix=[[[0, 0], [1, 0]], [[1, 0], [0, 0]]])
        with pytest.raises(ValidationError):
            lower_circuit(Circuit(gates=(gate,)), spin_system)
