"""
Enums shared across the simulator.

This module provides type-safe vocabularies for gate kinds, pulse events,
analysis conventions and noise channels, so callers and config files never
compare raw strings.

Example:
    >>> from nmr_bell.sim.constants import NegativityConvention
    >>>
    >>> if convention == NegativityConvention.DOUBLED:
    ...     print("range is [0, 1]")

"""

from enum import StrEnum


class GateKind(StrEnum):
    """
    Gate kinds understood by the circuit layer.

    Example:
        >>> Gate(gate=GateKind.RY, targets=(1,), angle=math.pi / 2)

    """

    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CNOT = "cnot"
    CUSTOM = "custom"


class EventKind(StrEnum):
    """Pulse-sequence event kinds."""

    RF = "rf"
    DELAY = "delay"


class PulseModel(StrEnum):
    """
    How an RF event is propagated.

    INSTANTANEOUS applies the ideal rotation; FINITE evolves the RF term
    together with the spin Hamiltonian for the event duration.
    """

    INSTANTANEOUS = "instantaneous"
    FINITE = "finite"


class NegativityConvention(StrEnum):
    """
    Bipartite negativity normalization.

    PLAIN is the absolute sum of negative eigenvalues of the partial
    transpose; DOUBLED is twice that, which maps maximal entanglement to 1.

    Example:
        >>> tripartite_negativity(rho, NegativityConvention.DOUBLED).tripartite
        0.9428090415820634

    """

    PLAIN = "plain"
    DOUBLED = "doubled"


class FidelityConvention(StrEnum):
    """Uhlmann fidelity as Tr√(√ρσ√ρ) (ROOT) or its square (SQUARED)."""

    ROOT = "root"
    SQUARED = "squared"


class Party(StrEnum):
    """The three parties of the (3,2,2) scenario."""

    A = "A"
    B = "B"
    C = "C"

    @property
    def qubit(self) -> int:
        """Return the 1-based qubit index carrying this party."""
        return "ABC".index(self.value) + 1


class ChannelKind(StrEnum):
    """Parametric noise channel families."""

    DEPOLARIZING = "depolarizing"
    DEPHASING = "dephasing"
    COMPOSITE = "composite"


class StateSource(StrEnum):
    """Where the pipeline obtains its prepared state."""

    CIRCUIT = "circuit"
    PULSE = "pulse"
    FILE = "file"
    MAXIMALLY_MIXED = "maximally_mixed"


class GrapeMethod(StrEnum):
    """Optimizer used by GRAPE."""

    LBFGS = "lbfgs"
    ASCENT = "ascent"


class GradientMode(StrEnum):
    """GRAPE gradient computation."""

    EXACT = "exact"
    FIRST_ORDER = "first_order"


class OutputFormat(StrEnum):
    """Report formats written by the CLI."""

    JSON = "json"
    CSV = "csv"
