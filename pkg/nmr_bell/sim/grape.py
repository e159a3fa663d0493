"""
Gradient ascent pulse engineering.

Piecewise-constant x/y controls on every spin are optimized so that the
segment product U_N ··· U_1 matches a target unitary up to global phase.
The figure of merit is Φ = |Tr(W†U)|²/64. Gradients are exact
(Fréchet derivative of each segment exponential in the Hamiltonian
eigenbasis) or first order in the segment length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.optimize import OptimizeResult, minimize

from ..const import (
    DEFAULT_GRAPE_MAX_AMPLITUDE,
    DEFAULT_GRAPE_MAX_ITERS,
    DEFAULT_GRAPE_SEGMENTS,
    DEFAULT_GRAPE_TARGET_FIDELITY,
    DEFAULT_J12,
    DIM,
    NUM_QUBITS,
    UNITARY_TOL,
)
from .constants import GradientMode, GrapeMethod
from .exceptions import ValidationError
from .models import SpinSystem
from .nmr import hamiltonian, spin_operator
from .qstate import ComplexArray, RealArray, is_unitary

_LOGGER = logging.getLogger(__name__)

CHANNELS_PER_SPIN = 2
NUM_CHANNELS = NUM_QUBITS * CHANNELS_PER_SPIN

# Control Hamiltonians I_x¹, I_y¹, I_x², I_y², I_x³, I_y³
_CONTROL_OPS: tuple[ComplexArray, ...] = tuple(
    spin_operator(axis, spin) for spin in range(1, NUM_QUBITS + 1) for axis in "xy"
)

_DEGENERATE_PHASE = 1e-9
_MIN_STEP = 1e-12


@dataclass(frozen=True, slots=True)
class GrapeProblem:
    """
    A GRAPE optimization task.

    ``duration`` is the total sequence time in seconds; controls are
    amplitudes in rad/s bounded by ``max_amplitude``.
    """

    target: ComplexArray
    system: SpinSystem = field(default_factory=SpinSystem)
    segments: int = DEFAULT_GRAPE_SEGMENTS
    duration: float = 1.5 / DEFAULT_J12
    max_amplitude: float = DEFAULT_GRAPE_MAX_AMPLITUDE
    max_iters: int = DEFAULT_GRAPE_MAX_ITERS
    target_fidelity: float = DEFAULT_GRAPE_TARGET_FIDELITY
    method: GrapeMethod = GrapeMethod.LBFGS
    gradient: GradientMode = GradientMode.EXACT
    seed: int = 0
    initial_scale: float = 0.1
    initial_controls: RealArray | None = None

    def __post_init__(self) -> None:
        """Validate the target and the discretization."""
        target = np.asarray(self.target, dtype=np.complex128)
        if target.shape != (DIM, DIM) or not is_unitary(target, 1e3 * UNITARY_TOL):
            raise ValidationError("GRAPE target must be an 8×8 unitary")
        object.__setattr__(self, "target", target)
        if self.segments < 1:
            raise ValidationError("GRAPE needs at least one segment")
        if self.duration <= 0 or self.max_amplitude <= 0:
            raise ValidationError("duration and max_amplitude must be positive")
        if self.initial_controls is not None:
            controls = np.asarray(self.initial_controls, dtype=np.float64)
            if controls.shape != self.control_shape:
                raise ValidationError(
                    f"initial controls shape {controls.shape} != {self.control_shape}"
                )

    @property
    def dt(self) -> float:
        """Segment length in seconds."""
        return self.duration / self.segments

    @property
    def control_shape(self) -> tuple[int, int]:
        """Shape (segments, channels) of the control array."""
        return (self.segments, NUM_CHANNELS)


@dataclass(slots=True)
class GrapeResult:
    """Outcome of a GRAPE run; ``controls`` are the best controls seen."""

    controls: RealArray
    fidelity: float
    fidelity_history: list[float]
    iterations: int
    converged: bool
    message: str = ""
    seed: int = 0


def _segment_hamiltonians(controls: RealArray, h_sys: ComplexArray) -> ComplexArray:
    ops = np.stack(_CONTROL_OPS)
    return h_sys[None, :, :] + np.einsum("kc,cij->kij", controls, ops)


def sequence_propagator(controls: RealArray, problem: GrapeProblem) -> ComplexArray:
    """Return U_N ··· U_1 for a control array."""
    h_k = _segment_hamiltonians(
        np.asarray(controls, dtype=np.float64).reshape(problem.control_shape),
        hamiltonian(problem.system).entries,
    )
    u = np.eye(DIM, dtype=np.complex128)
    for h in h_k:
        values, vectors = np.linalg.eigh(h)
        u = (vectors * np.exp(-1j * values * problem.dt)) @ vectors.conj().T @ u
    return u


def gate_fidelity(controls: RealArray, problem: GrapeProblem) -> float:
    """Return Φ = |Tr(W†U)|²/64."""
    u = sequence_propagator(controls, problem)
    return float(abs(np.trace(problem.target.conj().T @ u)) ** 2 / DIM**2)


def _divided_differences(values: RealArray, dt: float) -> ComplexArray:
    """Γ_mn for f(λ) = exp(−iλΔt), with f′ on (near-)degenerate pairs."""
    f = np.exp(-1j * values * dt)
    diff = values[:, None] - values[None, :]
    degenerate = np.abs(diff * dt) < _DEGENERATE_PHASE
    safe = np.where(degenerate, 1.0, diff)
    gamma = (f[:, None] - f[None, :]) / safe
    mean = (values[:, None] + values[None, :]) / 2
    derivative = -1j * dt * np.exp(-1j * mean * dt)
    return np.where(degenerate, derivative, gamma)


def phi_and_gradient(
    controls: RealArray,
    problem: GrapeProblem,
    mode: GradientMode | None = None,
) -> tuple[float, RealArray]:
    """
    Return Φ and ∂Φ/∂u for a control array of shape (segments, 6).

    With g = Tr(W†X_N), X_k = U_k X_{k−1} and P_k = W†U_N···U_{k+1},
    ∂g/∂u = Tr(P_k ∂U_k X_{k−1}) and ∂Φ/∂u = 2·Re(ḡ ∂g)/64.
    """
    mode = mode or problem.gradient
    u_ctrl = np.asarray(controls, dtype=np.float64).reshape(problem.control_shape)
    dt = problem.dt
    h_k = _segment_hamiltonians(u_ctrl, hamiltonian(problem.system).entries)

    eigen = [np.linalg.eigh(h) for h in h_k]
    props = [(vec * np.exp(-1j * val * dt)) @ vec.conj().T for val, vec in eigen]

    forward = [np.eye(DIM, dtype=np.complex128)]
    for u in props:
        forward.append(u @ forward[-1])
    w_dag = problem.target.conj().T
    g = complex(np.trace(w_dag @ forward[-1]))

    grad = np.zeros(problem.control_shape, dtype=np.float64)
    backward = w_dag
    ops = np.stack(_CONTROL_OPS)
    for k in range(problem.segments - 1, -1, -1):
        # backward holds P_k = W†U_N···U_{k+1}
        if mode == GradientMode.EXACT:
            values, vectors = eigen[k]
            gamma = _divided_differences(values, dt)
            q = vectors.conj().T @ forward[k] @ backward @ vectors
            a = np.einsum("mi,cij,jn->cmn", vectors.conj().T, ops, vectors)
            dg = np.einsum("nm,cmn->c", q, a * gamma[None, :, :])
        else:
            m = forward[k + 1] @ backward
            dg = -1j * dt * np.einsum("ji,cij->c", m, ops)
        grad[k] = 2 * np.real(np.conj(g) * dg) / DIM**2
        backward = backward @ props[k]
    return abs(g) ** 2 / DIM**2, grad


def _initial_controls(problem: GrapeProblem, seed: int) -> RealArray:
    if problem.initial_controls is not None:
        return np.asarray(problem.initial_controls, dtype=np.float64).copy()
    rng = np.random.default_rng(seed)
    scale = problem.initial_scale * problem.max_amplitude
    return rng.uniform(-scale, scale, size=problem.control_shape)


def _run_lbfgs(problem: GrapeProblem, x0: RealArray, seed: int) -> GrapeResult:
    history: list[float] = []
    best: dict[str, object] = {"phi": -math.inf, "x": x0}

    def objective(x: RealArray) -> tuple[float, RealArray]:
        phi, grad = phi_and_gradient(x, problem)
        if phi > best["phi"]:  # type: ignore[operator]
            best["phi"], best["x"] = phi, x.copy()
        return -phi, -grad.ravel()

    def callback(intermediate_result: OptimizeResult) -> None:
        history.append(float(-intermediate_result.fun))
        if history[-1] >= problem.target_fidelity:
            raise StopIteration

    history.append(phi_and_gradient(x0, problem)[0])
    bound = problem.max_amplitude
    result = minimize(
        objective,
        x0.ravel(),
        jac=True,
        method="L-BFGS-B",
        bounds=[(-bound, bound)] * x0.size,
        callback=callback,
        options={"maxiter": problem.max_iters, "ftol": 1e-15, "gtol": 1e-12},
    )
    phi_best = float(best["phi"])  # type: ignore[arg-type]
    return GrapeResult(
        controls=np.asarray(best["x"]).reshape(problem.control_shape),
        fidelity=phi_best,
        fidelity_history=history,
        iterations=len(history) - 1,
        converged=phi_best >= problem.target_fidelity,
        message=str(result.message),
        seed=seed,
    )


def _run_ascent(problem: GrapeProblem, x0: RealArray, seed: int) -> GrapeResult:
    """Projected gradient ascent with backtracking; Φ never decreases."""
    bound = problem.max_amplitude
    x = np.clip(x0, -bound, bound)
    phi, grad = phi_and_gradient(x, problem)
    history = [phi]
    step = 0.1 * bound / max(float(np.max(np.abs(grad))), 1e-300)
    message = "maximum iterations reached"
    for _ in range(problem.max_iters):
        if phi >= problem.target_fidelity:
            message = "target fidelity reached"
            break
        while step > _MIN_STEP:
            candidate = np.clip(x + step * grad, -bound, bound)
            phi_new, grad_new = phi_and_gradient(candidate, problem)
            if phi_new >= phi + 1e-4 * float(np.sum(grad * (candidate - x))):
                break
            step /= 2
        else:
            message = "step size underflow"
            break
        x, phi, grad = candidate, phi_new, grad_new
        history.append(phi)
        step *= 1.5
    return GrapeResult(
        controls=x,
        fidelity=phi,
        fidelity_history=history,
        iterations=len(history) - 1,
        converged=phi >= problem.target_fidelity,
        message=message,
        seed=seed,
    )


def grape_optimize(problem: GrapeProblem, seed: int | None = None) -> GrapeResult:
    """
    Optimize piecewise-constant controls toward the problem's target.

    Non-convergence is not an error: the best controls seen are returned
    with ``converged`` False.
    """
    run_seed = problem.seed if seed is None else seed
    x0 = _initial_controls(problem, run_seed)
    _LOGGER.info(
        "GRAPE %s: %d segments, %.3e s, seed %d",
        problem.method,
        problem.segments,
        problem.duration,
        run_seed,
    )
    if problem.method == GrapeMethod.ASCENT:
        result = _run_ascent(problem, x0, run_seed)
    else:
        result = _run_lbfgs(problem, x0, run_seed)
    if result.converged:
        _LOGGER.info(
            "GRAPE converged: Φ=%.6f after %d iterations",
            result.fidelity,
            result.iterations,
        )
    else:
        _LOGGER.warning(
            "GRAPE did not reach Φ=%.4f: best %.6f (%s)",
            problem.target_fidelity,
            result.fidelity,
            result.message,
        )
    return result


def grape_multistart(problem: GrapeProblem, restarts: int) -> GrapeResult:
    """
    Run independent restarts and return the best.

    Restart seeds are spawned from the problem seed so each run is
    reproducible on its own.
    """
    if restarts < 1:
        raise ValidationError("restarts must be at least 1")
    children = np.random.SeedSequence(problem.seed).spawn(restarts)
    seeds = [int(child.generate_state(1)[0]) for child in children]
    results = [grape_optimize(problem, seed=s) for s in seeds]
    best = max(results, key=lambda r: r.fidelity)
    _LOGGER.debug(
        "Multi-start fidelities: %s", ", ".join(f"{r.fidelity:.6f}" for r in results)
    )
    return best
