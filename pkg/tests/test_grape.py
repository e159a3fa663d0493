"""Test GRAPE optimal control."""

from __future__ import annotations

import numpy as np
import pytest

from nmr_bell.const import DEFAULT_J12
from nmr_bell.sim.circuits import cnot_matrix
from nmr_bell.sim.constants import GradientMode, GrapeMethod
from nmr_bell.sim.exceptions import ValidationError
from nmr_bell.sim.grape import (
    NUM_CHANNELS,
    GrapeProblem,
    gate_fidelity,
    grape_multistart,
    grape_optimize,
    phi_and_gradient,
    sequence_propagator,
)
from nmr_bell.sim.models import SpinSystem
from nmr_bell.sim.qstate import is_unitary


def _problem(**kwargs) -> GrapeProblem:
    defaults = {"target": cnot_matrix(1, 2), "segments": 6, "max_iters": 50, "seed": 3}
    return GrapeProblem(**{**defaults, **kwargs})


def _controls(problem: GrapeProblem, seed: int, scale: float = 0.1) -> np.ndarray:
    rng = np.random.default_rng(seed)
    bound = scale * problem.max_amplitude
    return rng.uniform(-bound, bound, size=problem.control_shape)


def _central_difference(controls: np.ndarray, problem: GrapeProblem, h: float) -> np.ndarray:
    numeric = np.zeros_like(controls)
    for index in np.ndindex(controls.shape):
        step = np.zeros_like(controls)
        step[index] = h
        numeric[index] = (
            gate_fidelity(controls + step, problem) - gate_fidelity(controls - step, problem)
        ) / (2 * h)
    return numeric


class TestProblem:
    """Problem validation."""

    def test_control_shape(self) -> None:
        """Test six channels per segment."""
        assert _problem(segments=9).control_shape == (9, NUM_CHANNELS)
        assert NUM_CHANNELS == 6

    def test_default_duration(self) -> None:
        """Test the default duration is 1.5/J12."""
        assert _problem().duration == pytest.approx(1.5 / DEFAULT_J12)

    def test_non_unitary_target(self) -> None:
        """Test a non-unitary target is rejected."""
        with pytest.raises(ValidationError):
            _problem(target=2 * np.eye(8))

    def test_initial_controls_shape(self) -> None:
        """Test initial controls must match the discretization."""
        with pytest.raises(ValidationError):
            _problem(initial_controls=np.zeros((5, 6)))

    def test_positive_duration(self) -> None:
        """Test zero duration is rejected."""
        with pytest.raises(ValidationError):
            _problem(duration=0.0)


class TestFigureOfMerit:
    """Φ and its gradient."""

    def test_propagator_unitary(self) -> None:
        """Test the segment product stays unitary."""
        problem = _problem()
        assert is_unitary(sequence_propagator(_controls(problem, 1), problem), 1e-10)

    def test_phi_bounds(self) -> None:
        """Test 0 ≤ Φ ≤ 1."""
        problem = _problem()
        phi = gate_fidelity(_controls(problem, 2), problem)
        assert 0.0 <= phi <= 1.0

    def test_phi_one_on_own_propagator(self) -> None:
        """Test Φ = 1 when the target is the controls' own propagator."""
        base = _problem()
        controls = _controls(base, 4)
        problem = _problem(target=sequence_propagator(controls, base))
        assert gate_fidelity(controls, problem) == pytest.approx(1.0, abs=1e-12)

    def test_phi_matches_gate_fidelity(self) -> None:
        """Test phi_and_gradient reports the same Φ."""
        problem = _problem()
        controls = _controls(problem, 5)
        phi, _ = phi_and_gradient(controls, problem)
        assert phi == pytest.approx(gate_fidelity(controls, problem))

    @pytest.mark.parametrize("seed", range(10))
    def test_exact_gradient_matches_finite_differences(self, seed: int) -> None:
        """Test the exact gradient against central differences at step 1e-6."""
        problem = _problem(segments=4)
        controls = _controls(problem, 100 + seed)
        _, grad = phi_and_gradient(controls, problem, GradientMode.EXACT)
        numeric = _central_difference(controls, problem, 1e-6)
        assert np.linalg.norm(grad - numeric) <= 1e-4 * np.linalg.norm(numeric)

    def test_exact_gradient_with_degenerate_spectrum(self) -> None:
        """Test zero controls, where segment spectra are degenerate."""
        problem = _problem(segments=3)
        controls = np.zeros(problem.control_shape)
        _, grad = phi_and_gradient(controls, problem, GradientMode.EXACT)
        numeric = _central_difference(controls, problem, 1e-6)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-9)

    def test_identity_target_without_hamiltonian(self) -> None:
        """Test zero controls on a zero Hamiltonian reach an identity target exactly."""
        problem = _problem(target=np.eye(8), system=SpinSystem.zero())
        controls = np.zeros(problem.control_shape)
        assert np.allclose(sequence_propagator(controls, problem), np.eye(8))
        phi, grad = phi_and_gradient(controls, problem)
        assert phi == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(grad, 0.0, atol=1e-9)

    def test_first_order_gradient_points_the_same_way(self) -> None:
        """Test the first-order gradient is close in direction for short segments."""
        problem = _problem(segments=40, initial_scale=0.01)
        controls = _controls(problem, 7, scale=0.01)
        _, exact = phi_and_gradient(controls, problem, GradientMode.EXACT)
        _, approx = phi_and_gradient(controls, problem, GradientMode.FIRST_ORDER)
        cosine = np.sum(exact * approx) / (np.linalg.norm(exact) * np.linalg.norm(approx))
        assert cosine > 0.9


class TestOptimizer:
    """L-BFGS-B and gradient ascent."""

    def test_ascent_is_monotone(self) -> None:
        """Test backtracking ascent never lowers Φ."""
        result = grape_optimize(_problem(method=GrapeMethod.ASCENT, max_iters=20))
        assert np.all(np.diff(result.fidelity_history) >= 0)
        assert result.iterations == len(result.fidelity_history) - 1

    def test_lbfgs_improves(self) -> None:
        """Test L-BFGS-B returns controls at least as good as the start."""
        problem = _problem(max_iters=30)
        result = grape_optimize(problem)
        assert result.fidelity >= result.fidelity_history[0]
        assert gate_fidelity(result.controls, problem) == pytest.approx(result.fidelity)

    def test_controls_respect_bounds(self) -> None:
        """Test amplitudes stay within ±max_amplitude."""
        problem = _problem(max_amplitude=500.0, max_iters=30)
        result = grape_optimize(problem)
        assert np.max(np.abs(result.controls)) <= 500.0 + 1e-9

    @pytest.mark.parametrize("method", list(GrapeMethod))
    def test_converges_from_nearby_start(self, method: GrapeMethod) -> None:
        """Test recovery of a reachable target from perturbed controls."""
        base = _problem(segments=5)
        solution = _controls(base, 8)
        start = solution + np.random.default_rng(9).normal(0, 5.0, size=solution.shape)
        problem = _problem(
            segments=5,
            target=sequence_propagator(solution, base),
            initial_controls=start,
            target_fidelity=0.999,
            max_iters=500,
            method=method,
        )
        result = grape_optimize(problem)
        assert result.converged
        assert result.fidelity >= 0.999

    def test_seed_reproducible(self) -> None:
        """Test equal seeds give equal results."""
        problem = _problem(max_iters=10)
        first = grape_optimize(problem, seed=11)
        second = grape_optimize(problem, seed=11)
        assert np.array_equal(first.controls, second.controls)
        assert first.seed == 11

    def test_multistart_keeps_best(self) -> None:
        """Test multi-start returns its best run."""
        problem = _problem(max_iters=5)
        best = grape_multistart(problem, restarts=3)
        children = np.random.SeedSequence(problem.seed).spawn(3)
        seeds = [int(child.generate_state(1)[0]) for child in children]
        assert best.seed in seeds
        assert best.fidelity == max(grape_optimize(problem, seed=s).fidelity for s in seeds)

    def test_multistart_needs_a_restart(self) -> None:
        """Test zero restarts raises."""
        with pytest.raises(ValidationError):
            grape_multistart(_problem(), restarts=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [0, 1])
    def test_cnot_reaches_target(self, seed: int) -> None:
        """Test CNOT(1,2) over 100 segments reaches Φ ≥ 0.99 from one seeded start."""
        problem = GrapeProblem(target=cnot_matrix(1, 2), seed=seed)
        assert problem.segments == 100
        assert problem.max_iters == 2000
        assert problem.duration == pytest.approx(1.5 / DEFAULT_J12)
        result = grape_optimize(problem)
        assert result.converged
        assert result.fidelity >= 0.99
        assert result.iterations <= 2000
