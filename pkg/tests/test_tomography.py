"""Test simulated NMR tomography and reconstruction."""

from __future__ import annotations

import itertools

from hypothesis import given, settings
import numpy as np
import pytest

from nmr_bell.const import TOMOGRAPHY_SETTINGS
from nmr_bell.sim.constants import FidelityConvention
from nmr_bell.sim.exceptions import InformationallyIncompleteError, ValidationError
from nmr_bell.sim.qstate import DensityMatrix, StateVector, state_fidelity, trace_distance
from nmr_bell.sim.tomography import (
    _readout_indices,
    TomographySetting,
    average_records,
    canonical_settings,
    from_pauli_coordinates,
    project_to_density,
    project_to_simplex,
    readout_amplitudes,
    reconstruct,
    residual,
    sensing_matrix,
    simulate_protocol,
    simulate_readout,
    to_pauli_coordinates,
)

from .const import NOISY_TOMOGRAPHY_ROOT_FIDELITY, random_density, seeds


class TestReadout:
    """Single-setting readout."""

    def test_readout_order(self) -> None:
        """Test spin 1 lines come first, other spins enumerated as binary."""
        indices = _readout_indices()
        assert len(indices) == 12
        assert indices[0] == (0b100, 0b000)
        assert indices[3] == (0b111, 0b011)
        assert indices[4] == (0b010, 0b000)
        assert indices[11] == (0b111, 0b110)

    def test_identity_setting_reads_coherences(self, rng: np.random.Generator) -> None:
        """Test III reads ρ[1s, 0s] directly."""
        rho = random_density(rng)
        record = simulate_readout(rho, "III")
        expected = [rho.entries[r, c] for r, c in _readout_indices()]
        assert np.allclose(record.values(), expected)

    def test_populations_invisible_without_pulses(self) -> None:
        """Test a basis state gives no signal in III."""
        record = simulate_readout(StateVector.basis(5).density(), "III")
        assert np.allclose(record.values(), 0.0)

    def test_setting_label_checked(self) -> None:
        """Test labels must be three of I, X, Y."""
        with pytest.raises(ValidationError):
            TomographySetting("IZI")
        with pytest.raises(ValidationError):
            TomographySetting("II")

    def test_lowercase_label(self) -> None:
        """Test labels are upper-cased."""
        assert TomographySetting("xyx").label == "XYX"
        assert TomographySetting("xyx").canonical

    def test_noise_needs_seed(self, s_density: DensityMatrix) -> None:
        """Test noisy readout without a seed raises."""
        with pytest.raises(ValidationError, match="seed"):
            simulate_readout(s_density, "IIY", noise_sigma=0.01)

    def test_negative_sigma(self, s_density: DensityMatrix) -> None:
        """Test negative noise is rejected."""
        with pytest.raises(ValidationError):
            simulate_readout(s_density, "IIY", noise_sigma=-0.1, seed=1)

    def test_noise_reproducible(self, s_density: DensityMatrix) -> None:
        """Test equal seeds give equal noisy records."""
        first = simulate_protocol(s_density, noise_sigma=0.01, seed=42)
        second = simulate_protocol(s_density, noise_sigma=0.01, seed=42)
        other = simulate_protocol(s_density, noise_sigma=0.01, seed=43)
        assert first == second
        assert first != other

    def test_noise_std(self, s_density: DensityMatrix) -> None:
        """Test the sample std of σ = 0.01 readout noise over 1000 draws."""
        exact = simulate_readout(s_density, "IXY").values()
        deviations = np.concatenate(
            [simulate_readout(s_density, "IXY", 0.01, seed).values() - exact for seed in range(1000)]
        )
        std = float(np.std(np.concatenate([deviations.real, deviations.imag])))
        assert 0.007 <= std <= 0.013

    def test_settings_draw_independent_noise(self) -> None:
        """Test repeated settings get different noise from child seeds."""
        rho = DensityMatrix.maximally_mixed()
        records = simulate_protocol(rho, [TomographySetting("III")] * 2, 0.1, seed=5)
        assert not np.allclose(records[0].values(), records[1].values())
        assert records[0].seed != records[1].seed


class TestSensing:
    """The linear measurement model."""

    def test_canonical_rank(self) -> None:
        """Test the seven settings are informationally complete."""
        sensing = sensing_matrix(TOMOGRAPHY_SETTINGS)
        assert sensing.matrix.shape == (7 * 24, 64)
        assert sensing.rank == 63
        assert sensing.rank_with_trace == 64
        assert sensing.complete

    def test_partial_design_incomplete(self) -> None:
        """Test dropping settings loses completeness."""
        assert not sensing_matrix(["III", "IIY"]).complete

    def test_empty_design(self) -> None:
        """Test an empty design raises."""
        with pytest.raises(ValidationError):
            sensing_matrix([])

    def test_matrix_matches_readout(self, rng: np.random.Generator) -> None:
        """Test A·r reproduces the simulated quadratures."""
        rho = random_density(rng)
        sensing = sensing_matrix(TOMOGRAPHY_SETTINGS)
        predicted = sensing.matrix @ to_pauli_coordinates(rho.entries)
        stacked = []
        for setting in canonical_settings():
            amps = readout_amplitudes(rho.entries, setting)
            stacked.extend((amps.real, amps.imag))
        assert np.allclose(predicted, np.concatenate(stacked))

    def test_pauli_coordinates(self, rng: np.random.Generator) -> None:
        """Test coordinates invert and the identity coordinate is the trace."""
        rho = random_density(rng)
        coords = to_pauli_coordinates(rho.entries)
        assert coords[0] == pytest.approx(1.0)
        assert np.allclose(from_pauli_coordinates(coords), rho.entries)


class TestProjection:
    """Projection onto density matrices."""

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds)
    def test_simplex(self, seed: int) -> None:
        """Test the simplex projection lands on the simplex."""
        values = np.random.default_rng(seed).normal(size=8)
        projected = project_to_simplex(values)
        assert np.all(projected >= 0)
        assert projected.sum() == pytest.approx(1.0)

    def test_simplex_fixed_point(self) -> None:
        """Test points on the simplex are unchanged."""
        point = np.array([0.5, 0.25, 0.25, 0.0])
        assert np.allclose(project_to_simplex(point), point)

    def test_density_projection(self, rng: np.random.Generator) -> None:
        """Test a Hermitian matrix projects to a valid state."""
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        projected = project_to_density(m + m.conj().T)
        DensityMatrix(projected)


class TestReconstruction:
    """Constrained least squares."""

    def test_noiseless_s_state(self, s_density: DensityMatrix) -> None:
        """Test exact records reconstruct |S⟩."""
        result = reconstruct(simulate_protocol(s_density))
        assert result.converged
        assert state_fidelity(s_density, result.rho_hat) == pytest.approx(1.0, abs=1e-6)
        assert result.residual < 1e-12

    def test_noiseless_mixed_state(self, rng: np.random.Generator) -> None:
        """Test exact records reconstruct a random mixed state."""
        rho = random_density(rng)
        result = reconstruct(simulate_protocol(rho))
        assert trace_distance(rho, result.rho_hat) < 1e-6

    def test_noisy_s_state_at_frozen_seed(self, s_density: DensityMatrix) -> None:
        """Test σ = 0.01 readout of |S⟩ at seed 42 reconstructs the frozen fidelity."""
        records = simulate_protocol(s_density, noise_sigma=0.01, seed=42)
        result = reconstruct(records)
        assert result.converged
        assert np.min(np.linalg.eigvalsh(result.rho_hat.entries)) >= -1e-8
        assert np.trace(result.rho_hat.entries).real == pytest.approx(1.0)
        root = state_fidelity(s_density, result.rho_hat)
        squared = state_fidelity(s_density, result.rho_hat, FidelityConvention.SQUARED)
        assert root == pytest.approx(NOISY_TOMOGRAPHY_ROOT_FIDELITY, abs=1e-3)
        assert squared == pytest.approx(root**2)
        assert result.residual == pytest.approx(residual(result.rho_hat, records))

    def test_maximally_mixed_fixed_point(self) -> None:
        """Test exact records of I/8 give back I/8."""
        rho = DensityMatrix.maximally_mixed()
        result = reconstruct(simulate_protocol(rho))
        assert np.allclose(result.rho_hat.entries, rho.entries, atol=1e-8)

    def test_noiseless_round_trips(self, rng: np.random.Generator) -> None:
        """Test exact records of random states of every rank reconstruct them."""
        for trial in range(50):
            rho = random_density(rng, rank=1 + trial % 8)
            result = reconstruct(simulate_protocol(rho))
            assert result.converged
            assert trace_distance(rho, result.rho_hat) <= 1e-6

    @pytest.mark.slow
    def test_error_grows_with_sigma(self, s_density: DensityMatrix) -> None:
        """Test mean trace distance over 100 seeds rises with σ."""
        means = []
        for sigma in (0.0, 0.005, 0.01, 0.02):
            errors = [
                trace_distance(
                    s_density,
                    reconstruct(simulate_protocol(s_density, noise_sigma=sigma, seed=seed)).rho_hat,
                )
                for seed in range(100)
            ]
            means.append(float(np.mean(errors)))
        assert means[0] < 1e-6
        assert all(low < high for low, high in itertools.pairwise(means))

    @pytest.mark.slow
    def test_averaging_reduces_error(self, s_density: DensityMatrix) -> None:
        """Test averaging k runs shrinks the mean error roughly as 1/√k."""

        def mean_error(k: int) -> float:
            errors = []
            for repeat in range(20):
                runs = [
                    simulate_protocol(s_density, noise_sigma=0.02, seed=1000 * repeat + i)
                    for i in range(k)
                ]
                estimate = reconstruct(average_records(runs)).rho_hat
                errors.append(trace_distance(s_density, estimate))
            return float(np.mean(errors))

        single, four, sixteen = (mean_error(k) for k in (1, 4, 16))
        assert 1.0 <= single / four <= 4.0
        assert 2.0 <= single / sixteen <= 8.0

    def test_average_records(self, s_density: DensityMatrix) -> None:
        """Test averaging keeps settings, means amplitudes and shrinks σ."""
        runs = [simulate_protocol(s_density, noise_sigma=0.02, seed=s) for s in (1, 2, 3, 4)]
        averaged = average_records(runs)
        assert [r.setting for r in averaged] == list(TOMOGRAPHY_SETTINGS)
        assert averaged[0].noise_sigma == pytest.approx(0.01)
        assert averaged[0].seed == runs[0][0].seed
        expected = np.mean([run[0].values() for run in runs], axis=0)
        assert np.allclose(averaged[0].values(), expected)

    def test_average_records_mismatch(self, s_density: DensityMatrix) -> None:
        """Test runs with different settings cannot be averaged."""
        run = simulate_protocol(s_density)
        with pytest.raises(ValidationError):
            average_records([run, run[:3]])
        with pytest.raises(ValidationError):
            average_records([])

    def test_incomplete_raises(self, s_density: DensityMatrix) -> None:
        """Test reconstruction refuses an incomplete design."""
        records = simulate_protocol(s_density, [TomographySetting("III")])
        with pytest.raises(InformationallyIncompleteError) as err:
            reconstruct(records)
        assert err.value.rank < 64

    def test_iteration_cap(self, s_density: DensityMatrix) -> None:
        """Test the solver reports non-convergence at the cap."""
        records = simulate_protocol(s_density, noise_sigma=0.05, seed=3)
        result = reconstruct(records, tol=0.0, max_iters=3)
        assert not result.converged
        assert result.iterations == 3
