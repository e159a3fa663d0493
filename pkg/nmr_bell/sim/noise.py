"""
Parametric noise channels applied to the final state.

Channels are given in Kraus form and checked for completeness when the
operators are built. Calibration finds the channel strength that brings a
state's fidelity down to a target value.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
import functools
import itertools
import logging

import numpy as np

from ..const import (
    CALIBRATION_MAX_ITERS,
    CALIBRATION_TOL,
    DIM,
    NUM_QUBITS,
    REFERENCE_CONCURRENCE_RANGE,
    REFERENCE_FIDELITY,
    REFERENCE_NEGATIVITY,
    REFERENCE_T26,
    UNITARY_TOL,
)
from .bell import MeasurementSettings, evaluate, t26
from .constants import ChannelKind, FidelityConvention, NegativityConvention
from .entanglement import pairwise_concurrences, tripartite_negativity
from .exceptions import ConvergenceError, ValidationError
from .models import NoiseChannel
from .qstate import ComplexArray, DensityMatrix, StateVector, embed, pauli_string, state_fidelity

_LOGGER = logging.getLogger(__name__)

_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@functools.cache
def _non_identity_paulis() -> tuple[ComplexArray, ...]:
    labels = ("".join(p) for p in itertools.product("IXYZ", repeat=NUM_QUBITS))
    return tuple(pauli_string(label).entries for label in labels if label != "III")


def _depolarizing_kraus(p: float) -> list[ComplexArray]:
    ops = [np.sqrt(1 - p + p / DIM**2) * np.eye(DIM, dtype=np.complex128)]
    ops += [np.sqrt(p / DIM**2) * pauli for pauli in _non_identity_paulis()]
    return ops


def _dephasing_kraus(q: tuple[float, float, float]) -> list[ComplexArray]:
    ops = [np.eye(DIM, dtype=np.complex128)]
    for qubit, strength in enumerate(q, start=1):
        local = (
            np.sqrt(1 - strength / 2) * np.eye(DIM, dtype=np.complex128),
            np.sqrt(strength / 2) * embed(_Z, qubit),
        )
        ops = [k @ prev for prev in ops for k in local]
    return ops


def kraus_operators(channel: NoiseChannel) -> list[ComplexArray]:
    """
    Return the Kraus operators of a channel.

    Composite channels multiply the Kraus sets of their parts in order.

    Raises:
        ValidationError: If Σ K†K deviates from I by more than 1e-10.

    """
    match channel.kind:
        case ChannelKind.DEPOLARIZING:
            ops = _depolarizing_kraus(float(channel.p or 0.0))
        case ChannelKind.DEPHASING:
            ops = _dephasing_kraus(channel.q or (0.0, 0.0, 0.0))
        case ChannelKind.COMPOSITE:
            ops = [np.eye(DIM, dtype=np.complex128)]
            for part in channel.channels:
                ops = [k @ prev for prev in ops for k in kraus_operators(part)]
    completeness = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(completeness - np.eye(DIM))) > UNITARY_TOL:
        raise ValidationError(f"{channel.kind} channel is not trace preserving")
    return ops


def apply(channel: NoiseChannel, rho: DensityMatrix) -> DensityMatrix:
    """Return Σ K ρ K†."""
    if rho.dim != DIM:
        raise ValidationError("noise channels act on three-qubit states")
    if channel.kind == ChannelKind.COMPOSITE:
        for part in channel.channels:
            rho = apply(part, rho)
        return rho
    out = sum(k @ rho.entries @ k.conj().T for k in kraus_operators(channel))
    return DensityMatrix((out + out.conj().T) / 2)


@dataclass(frozen=True, slots=True)
class Calibration:
    """Channel strength that reproduces a target fidelity."""

    kind: ChannelKind
    parameter: float
    fidelity: float
    convention: FidelityConvention
    iterations: int

    def channel(self) -> NoiseChannel:
        """Return the calibrated channel."""
        if self.kind == ChannelKind.DEPHASING:
            return NoiseChannel.dephasing(self.parameter)
        return NoiseChannel.depolarizing(self.parameter)


def _family(kind: ChannelKind) -> Callable[[float], NoiseChannel]:
    match kind:
        case ChannelKind.DEPOLARIZING:
            return NoiseChannel.depolarizing
        case ChannelKind.DEPHASING:
            return NoiseChannel.dephasing
    raise ValidationError(f"no one-parameter family for {kind} channels")


def calibrate_to_fidelity(
    target: float,
    core: StateVector,
    kind: ChannelKind = ChannelKind.DEPOLARIZING,
    convention: FidelityConvention = FidelityConvention.ROOT,
) -> Calibration:
    """
    Bisect the channel strength until the fidelity to ``core`` hits ``target``.

    Raises:
        ValidationError: If ``target`` lies outside (0, 1] or below the
            fidelity reached at full strength.
        ConvergenceError: If bisection does not reach 1e-6 in 60 iterations.

    """
    if not 0.0 < target <= 1.0:
        raise ValidationError(f"target fidelity {target} outside (0, 1]")
    family = _family(kind)
    ideal = core.density()

    def fidelity(x: float) -> float:
        return state_fidelity(ideal, apply(family(x), ideal), convention)

    if fidelity(0.0) - target <= CALIBRATION_TOL:
        return Calibration(kind, 0.0, fidelity(0.0), convention, 0)
    floor = fidelity(1.0)
    if target < floor - CALIBRATION_TOL:
        raise ValidationError(
            f"target fidelity {target} unreachable: {kind} floor is {floor:.6f}"
        )
    low, high = 0.0, 1.0
    for iteration in range(1, CALIBRATION_MAX_ITERS + 1):
        mid = (low + high) / 2
        value = fidelity(mid)
        if abs(value - target) <= CALIBRATION_TOL:
            _LOGGER.debug(
                "Calibrated %s to F=%.6f: parameter %.7f after %d steps",
                kind,
                value,
                mid,
                iteration,
            )
            return Calibration(kind, mid, value, convention, iteration)
        if value > target:
            low = mid
        else:
            high = mid
    raise ConvergenceError(
        f"calibration to F={target} did not converge", iterations=CALIBRATION_MAX_ITERS
    )


def calibrate_both(
    target: float,
    core: StateVector,
    kind: ChannelKind = ChannelKind.DEPOLARIZING,
) -> dict[FidelityConvention, Calibration]:
    """Calibrate under each fidelity convention."""
    return {
        convention: calibrate_to_fidelity(target, core, kind, convention)
        for convention in FidelityConvention
    }


@dataclass(frozen=True, slots=True)
class ReferenceComparison:
    """A predicted quantity beside its experimental reference."""

    name: str
    predicted: float
    reference: float
    uncertainty: float

    @property
    def residual(self) -> float:
        """predicted − reference."""
        return self.predicted - self.reference

    @property
    def sigmas(self) -> float:
        """Residual in units of the quoted uncertainty."""
        return self.residual / self.uncertainty if self.uncertainty else float("inf")


@dataclass(frozen=True, slots=True)
class ReferenceFit:
    """Single-parameter channel calibrated on fidelity, compared to all references."""

    calibration: Calibration
    comparisons: tuple[ReferenceComparison, ...]


def fit_reference(
    core: StateVector,
    kind: ChannelKind = ChannelKind.DEPOLARIZING,
    convention: FidelityConvention = FidelityConvention.ROOT,
    settings: MeasurementSettings | None = None,
) -> ReferenceFit:
    """
    Calibrate on the experimental fidelity and predict the other references.

    One isotropic parameter cannot match fidelity, negativity and T26 at
    once; the residuals are reported rather than minimized jointly.
    """
    fidelity_ref, fidelity_err = REFERENCE_FIDELITY
    calibration = calibrate_to_fidelity(fidelity_ref, core, kind, convention)
    noisy = apply(calibration.channel(), core.density())
    negativity = tripartite_negativity(noisy, NegativityConvention.DOUBLED).tripartite
    bell = evaluate(t26(), noisy, settings or MeasurementSettings.maximal())
    concurrences = pairwise_concurrences(noisy)
    low, high = REFERENCE_CONCURRENCE_RANGE
    mean_concurrence = sum(concurrences.values()) / len(concurrences)
    comparisons = (
        ReferenceComparison("fidelity", calibration.fidelity, fidelity_ref, fidelity_err),
        ReferenceComparison("negativity", negativity, *REFERENCE_NEGATIVITY),
        ReferenceComparison("t26", bell, *REFERENCE_T26),
        ReferenceComparison(
            "concurrence", mean_concurrence, (low + high) / 2, (high - low) / 2
        ),
    )
    for comparison in comparisons:
        _LOGGER.info(
            "%s: predicted %.4f, reference %.4f (%+.1f σ)",
            comparison.name,
            comparison.predicted,
            comparison.reference,
            comparison.sigmas,
        )
    return ReferenceFit(calibration=calibration, comparisons=comparisons)
