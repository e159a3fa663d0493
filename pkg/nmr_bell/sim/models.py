"""Pydantic models for the serializable simulator types."""

from __future__ import annotations

import math
from typing import Literal, Self

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..const import DEFAULT_J12, DEFAULT_J13, DEFAULT_J23, NUM_QUBITS, UNITARY_TOL
from .constants import (
    ChannelKind,
    EventKind,
    GateKind,
    NegativityConvention,
    PulseModel,
)


Complex = tuple[float, float]

_ROTATIONS = (GateKind.RX, GateKind.RY, GateKind.RZ)


def _check_qubits(targets: tuple[int, ...]) -> tuple[int, ...]:
    for q in targets:
        if not 1 <= q <= NUM_QUBITS:
            raise ValueError(f"qubit index {q} outside 1..{NUM_QUBITS}")
    if len(set(targets)) != len(targets):
        raise ValueError(f"repeated qubit in targets {targets}")
    return targets


class Gate(BaseModel):
    """
    A circuit gate.

    Rotations carry one target and an angle in radians; CNOT carries
    ``targets = (control, target)``; custom gates carry a unitary as rows of
    ``[re, im]`` pairs acting on their targets in the listed order.

    Example:
        >>> Gate(gate=GateKind.CNOT, targets=(1, 2))
        >>> Gate(gate=GateKind.RY, targets=(1,), angle=math.pi / 2)

    """

    gate: GateKind = Field(..., description="Gate kind")
    targets: tuple[int, ...] = Field(..., description="1-based qubit indices")
    angle: float | None = Field(None, description="Rotation angle in radians")
    matrix: list[list[Complex]] | None = Field(
        None, description="Unitary for custom gates, rows of [re, im]"
    )

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("targets")
    @classmethod
    def _valid_targets(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        return _check_qubits(v)

    @model_validator(mode="after")
    def _consistent(self) -> Self:
        if self.gate in _ROTATIONS:
            if len(self.targets) != 1 or self.angle is None:
                raise ValueError(f"{self.gate} needs one target and an angle")
        elif self.gate == GateKind.CNOT:
            if len(self.targets) != 2:
                raise ValueError("cnot needs targets (control, target)")
        elif self.gate == GateKind.CUSTOM:
            if self.matrix is None:
                raise ValueError("custom gate needs a matrix")
            u = self.unitary()
            if u.shape != (2 ** len(self.targets),) * 2:
                raise ValueError("custom matrix does not match target count")
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > UNITARY_TOL:
                raise ValueError("custom matrix is not unitary")
        return self

    @property
    def control(self) -> int:
        """Control qubit of a CNOT."""
        return self.targets[0]

    @property
    def target(self) -> int:
        """Target qubit of a CNOT, or the single rotation target."""
        return self.targets[-1]

    def unitary(self) -> np.ndarray:
        """Return the custom matrix as a complex array."""
        if self.matrix is None:
            raise ValueError("only custom gates carry a matrix")
        return np.array([[complex(re, im) for re, im in row] for row in self.matrix])


class Circuit(BaseModel):
    """An ordered gate list on three qubits."""

    gates: tuple[Gate, ...] = Field(default=(), description="Gates in time order")
    qubit_count: Literal[3] = Field(3, description="Number of qubits")

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def cnot_count(self) -> int:
        """Number of CNOT gates."""
        return sum(1 for g in self.gates if g.gate == GateKind.CNOT)

    @property
    def rotation_count(self) -> int:
        """Number of single-qubit rotations."""
        return sum(1 for g in self.gates if g.gate in _ROTATIONS)

    def then(self, *gates: Gate) -> Circuit:
        """Return a new circuit with ``gates`` appended."""
        return Circuit(gates=(*self.gates, *gates))


class SpinSystem(BaseModel):
    """
    Rotating-frame spin system.

    Offsets are ω_i − ω_RF in rad/s; couplings are J_ij in Hz.
    """

    offsets: tuple[float, float, float] = Field(
        (0.0, 0.0, 0.0), description="Larmor offsets in rad/s"
    )
    j12: float = Field(DEFAULT_J12, description="J coupling 1-2 in Hz")
    j13: float = Field(DEFAULT_J13, description="J coupling 1-3 in Hz")
    j23: float = Field(DEFAULT_J23, description="J coupling 2-3 in Hz")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _finite(self) -> Self:
        values = (*self.offsets, self.j12, self.j13, self.j23)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("spin system parameters must be finite")
        return self

    @classmethod
    def zero(cls) -> SpinSystem:
        """Return a system with no offsets and no couplings."""
        return cls(j12=0.0, j13=0.0, j23=0.0)

    def coupling(self, i: int, j: int) -> float:
        """Return J_ij in Hz for an unordered spin pair."""
        pair = tuple(sorted((i, j)))
        table = {(1, 2): self.j12, (1, 3): self.j13, (2, 3): self.j23}
        if pair not in table:
            raise ValueError(f"no coupling between spins {i} and {j}")
        return table[pair]  # type: ignore[index]

    def refocus_delay(self, i: int, j: int) -> float:
        """Return τ_ij = 1/(2|J_ij|) in seconds."""
        j_ij = self.coupling(i, j)
        if j_ij == 0:
            raise ValueError(f"coupling J{i}{j} is zero")
        return 1.0 / (2.0 * abs(j_ij))


class PulseEvent(BaseModel):
    """
    One event of a pulse sequence.

    RF events rotate the targeted spins by ``angle`` about the axis
    (cos φ, sin φ, 0); delays evolve under the spin Hamiltonian.

    Example:
        >>> PulseEvent(kind=EventKind.RF, targets=(1, 2, 3), angle=math.pi)
        >>> PulseEvent(kind=EventKind.DELAY, duration=1 / (2 * 69.65))

    """

    kind: EventKind = Field(..., description="Event kind")
    targets: tuple[int, ...] = Field((), description="Spins hit by an RF event")
    angle: float = Field(0.0, description="Nutation angle in radians")
    phase: float = Field(0.0, description="RF phase in radians")
    duration: float = Field(0.0, ge=0.0, description="Duration in seconds")
    model: PulseModel = Field(PulseModel.INSTANTANEOUS, description="RF model")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("targets")
    @classmethod
    def _valid_targets(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        return _check_qubits(v)

    @model_validator(mode="after")
    def _consistent(self) -> Self:
        if self.kind == EventKind.RF:
            if not self.targets:
                raise ValueError("rf event needs at least one target spin")
            if self.model == PulseModel.FINITE and self.duration <= 0:
                raise ValueError("finite rf event needs a positive duration")
        elif self.targets:
            raise ValueError("delay events take no targets")
        return self

    @classmethod
    def rf(
        cls,
        targets: tuple[int, ...],
        angle: float,
        phase: float = 0.0,
        duration: float = 0.0,
        model: PulseModel = PulseModel.INSTANTANEOUS,
    ) -> PulseEvent:
        """Build an RF event."""
        return cls(
            kind=EventKind.RF,
            targets=targets,
            angle=angle % (2 * math.pi),
            phase=phase % (2 * math.pi),
            duration=duration,
            model=model,
        )

    @classmethod
    def delay(cls, duration: float) -> PulseEvent:
        """Build a free-evolution event."""
        return cls(kind=EventKind.DELAY, duration=duration)


class BellTerm(BaseModel):
    """
    One correlator of a (3,2,2) Bell functional.

    ``a``, ``b``, ``c`` select the setting (0 or 1) of each party, or None when
    the party is absent from the correlator.
    """

    a: Literal[0, 1] | None = None
    b: Literal[0, 1] | None = None
    c: Literal[0, 1] | None = None
    coeff: int = Field(..., description="Integer coefficient")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _not_empty(self) -> Self:
        if self.a is None and self.b is None and self.c is None:
            raise ValueError("a term needs at least one party")
        return self

    @property
    def key(self) -> tuple[int | None, int | None, int | None]:
        """Return the (a, b, c) setting selector."""
        return (self.a, self.b, self.c)

    @property
    def label(self) -> str:
        """Return the correlator label, e.g. ``A1*B0*C1``."""
        parts = [
            f"{party}{idx}"
            for party, idx in zip("ABC", self.key, strict=True)
            if idx is not None
        ]
        return "*".join(parts)


class BellFunctional(BaseModel):
    """A Bell functional: a table of correlator coefficients and its local bound."""

    name: str = Field(..., description="Functional name")
    terms: tuple[BellTerm, ...] = Field(..., description="Correlator terms")
    classical_bound: float = Field(..., description="Local-realistic bound")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _valid_terms(self) -> Self:
        if not self.terms:
            raise ValueError("a Bell functional needs at least one term")
        keys = [t.key for t in self.terms]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate correlator in Bell functional")
        return self

    @property
    def table(self) -> dict[tuple[int | None, int | None, int | None], int]:
        """Return the coefficient table keyed by setting selector."""
        return {t.key: t.coeff for t in self.terms}

    def coefficient(self, a: int | None, b: int | None, c: int | None) -> int:
        """Return the coefficient of ⟨A_a B_b C_c⟩, zero when absent."""
        return self.table.get((a, b, c), 0)


class MeasurementRecord(BaseModel):
    """
    Simulated readout of one tomography setting.

    ``amplitudes`` holds twelve single-quantum transition amplitudes as
    ``[re, im]`` pairs: spin 1 with the other spins in 00, 01, 10, 11, then
    spin 2, then spin 3.
    """

    setting: str = Field(..., description="Tomography setting label, e.g. IYY")
    amplitudes: tuple[Complex, ...] = Field(..., min_length=12, max_length=12)
    noise_sigma: float = Field(0.0, ge=0.0, description="Gaussian noise std")
    seed: int | None = Field(None, description="Seed that produced the noise")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("setting")
    @classmethod
    def _valid_label(cls, v: str) -> str:
        v = v.upper()
        if len(v) != NUM_QUBITS or any(ch not in "IXY" for ch in v):
            raise ValueError(f"setting label {v!r} must be three of I, X, Y")
        return v

    def values(self) -> np.ndarray:
        """Return the amplitudes as a complex array."""
        return np.array([complex(re, im) for re, im in self.amplitudes])


class NegativityReport(BaseModel):
    """Bipartite negativities of every one-versus-two split and their geometric mean."""

    n_a_bc: float = Field(..., ge=0.0, description="Negativity of A|BC")
    n_b_ac: float = Field(..., ge=0.0, description="Negativity of B|AC")
    n_c_ab: float = Field(..., ge=0.0, description="Negativity of C|AB")
    tripartite: float = Field(..., ge=0.0, description="Geometric mean")
    convention: NegativityConvention = Field(..., description="Normalization")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _geometric_mean(self) -> Self:
        expected = (self.n_a_bc * self.n_b_ac * self.n_c_ab) ** (1 / 3)
        if abs(expected - self.tripartite) > 1e-12:
            raise ValueError("tripartite negativity is not the geometric mean")
        return self


class NoiseChannel(BaseModel):
    """
    Parametric noise channel.

    ``depolarizing`` uses ``p``; ``dephasing`` uses one ``q`` per qubit;
    ``composite`` applies ``channels`` in order.

    Example:
        >>> NoiseChannel(kind=ChannelKind.DEPOLARIZING, p=0.0583)
        >>> NoiseChannel(kind=ChannelKind.DEPHASING, q=(0.1, 0.1, 0.2))

    """

    kind: ChannelKind = Field(..., description="Channel family")
    p: float | None = Field(None, ge=0.0, le=1.0, description="Depolarizing weight")
    q: tuple[float, float, float] | None = Field(
        None, description="Per-qubit dephasing strengths"
    )
    channels: tuple[NoiseChannel, ...] = Field((), description="Composite parts")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _parameters(self) -> Self:
        if self.kind == ChannelKind.DEPOLARIZING and self.p is None:
            raise ValueError("depolarizing channel needs p")
        if self.kind == ChannelKind.DEPHASING:
            if self.q is None:
                raise ValueError("dephasing channel needs q")
            if any(not 0.0 <= x <= 1.0 for x in self.q):
                raise ValueError("dephasing parameters must lie in [0, 1]")
        if self.kind == ChannelKind.COMPOSITE and not self.channels:
            raise ValueError("composite channel needs at least one part")
        return self

    @classmethod
    def depolarizing(cls, p: float) -> NoiseChannel:
        """Build a depolarizing channel."""
        return cls(kind=ChannelKind.DEPOLARIZING, p=p)

    @classmethod
    def dephasing(cls, q: float | tuple[float, float, float]) -> NoiseChannel:
        """Build a dephasing channel; a scalar applies to all qubits."""
        qs = (q, q, q) if isinstance(q, int | float) else q
        return cls(kind=ChannelKind.DEPHASING, q=qs)

    @classmethod
    def composite(cls, *channels: NoiseChannel) -> NoiseChannel:
        """Build a channel applying ``channels`` in order."""
        return cls(kind=ChannelKind.COMPOSITE, channels=channels)
