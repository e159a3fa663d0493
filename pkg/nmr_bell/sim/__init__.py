"""
Simulation library for the three-qubit |S⟩ state.

This library provides dense three-qubit linear algebra, gate- and pulse-level
state preparation, GRAPE, tomography, entanglement measures, Bell functionals
and noise channels.
"""

from .bell import (
    ClassicalBound,
    MeasurementSettings,
    PseudopureEvaluation,
    ScanEntry,
    SweepCurve,
    bell_operator,
    chsh,
    classical_bound_bruteforce,
    evaluate,
    format_functional,
    incompatibility_scan,
    incompatibility_sweep,
    observable,
    parse_functional,
    pps_scaled_evaluate,
    t26,
    t26_as_printed,
)
from .circuits import (
    PseudopureSpec,
    ReferenceState,
    apply_circuit,
    circuit_unitary,
    ghz_circuit,
    pseudopure_density,
    reference_angles,
    reference_state,
    s_prep_circuit,
)
from .constants import (
    ChannelKind,
    EventKind,
    FidelityConvention,
    GateKind,
    GradientMode,
    GrapeMethod,
    NegativityConvention,
    OutputFormat,
    Party,
    PulseModel,
    StateSource,
)
from .entanglement import (
    bipartite_negativity,
    concurrence,
    pairwise_concurrences,
    tripartite_negativity,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    InformationallyIncompleteError,
    NmrBellError,
    StageError,
    ValidationError,
)
from .grape import GrapeProblem, GrapeResult, grape_multistart, grape_optimize, phi_and_gradient
from .models import (
    BellFunctional,
    BellTerm,
    Circuit,
    Gate,
    MeasurementRecord,
    NegativityReport,
    NoiseChannel,
    PulseEvent,
    SpinSystem,
)
from .nmr import (
    PulseProgram,
    cnot_pulse_program,
    evolve,
    hamiltonian,
    lower_circuit,
    program_unitary,
)
from .noise import Calibration, ReferenceFit, apply, calibrate_to_fidelity, fit_reference
from .qstate import (
    DensityMatrix,
    HermitianOperator,
    StateVector,
    expectation,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    state_fidelity,
    tensor,
    trace_distance,
)
from .tomography import (
    ReconstructionResult,
    SensingMatrix,
    TomographySetting,
    average_records,
    reconstruct,
    sensing_matrix,
    simulate_readout,
)

__all__ = [
    "BellFunctional",
    "BellTerm",
    "Calibration",
    "ChannelKind",
    "Circuit",
    "ClassicalBound",
    "ConfigError",
    "ConvergenceError",
    "DensityMatrix",
    "DimensionError",
    "EventKind",
    "FidelityConvention",
    "Gate",
    "GateKind",
    "GradientMode",
    "GrapeMethod",
    "GrapeProblem",
    "GrapeResult",
    "HermitianOperator",
    "InformationallyIncompleteError",
    "MeasurementRecord",
    "MeasurementSettings",
    "NegativityConvention",
    "NegativityReport",
    "NmrBellError",
    "NoiseChannel",
    "OutputFormat",
    "Party",
    "PseudopureEvaluation",
    "PseudopureSpec",
    "PulseEvent",
    "PulseModel",
    "PulseProgram",
    "ReconstructionResult",
    "ReferenceFit",
    "ReferenceState",
    "ScanEntry",
    "SensingMatrix",
    "SpinSystem",
    "StageError",
    "StateSource",
    "StateVector",
    "SweepCurve",
    "TomographySetting",
    "ValidationError",
    "apply",
    "apply_circuit",
    "average_records",
    "bell_operator",
    "bipartite_negativity",
    "calibrate_to_fidelity",
    "chsh",
    "circuit_unitary",
    "classical_bound_bruteforce",
    "cnot_pulse_program",
    "concurrence",
    "evaluate",
    "evolve",
    "expectation",
    "fit_reference",
    "format_functional",
    "ghz_circuit",
    "grape_multistart",
    "grape_optimize",
    "hamiltonian",
    "hermitian_eigenvalues",
    "incompatibility_scan",
    "incompatibility_sweep",
    "lower_circuit",
    "observable",
    "pairwise_concurrences",
    "parse_functional",
    "partial_trace",
    "partial_transpose",
    "phi_and_gradient",
    "pps_scaled_evaluate",
    "program_unitary",
    "pseudopure_density",
    "reconstruct",
    "reference_angles",
    "reference_state",
    "s_prep_circuit",
    "sensing_matrix",
    "simulate_readout",
    "state_fidelity",
    "t26",
    "t26_as_printed",
    "tensor",
    "trace_distance",
    "tripartite_negativity",
]
