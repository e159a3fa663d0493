"""Constants for the nmr-bell simulator."""

from __future__ import annotations

import math
from typing import Final

# Package name used in logs and report headers
DOMAIN: Final = "nmr_bell"

# Report schema; bump on any incompatible change of report.json
REPORT_SCHEMA_VERSION: Final = 1

# Numerical tolerances
HERM_TOL: Final = 1e-10
PSD_TOL: Final = 1e-8
NORM_TOL: Final = 1e-12
UNITARY_TOL: Final = 1e-10
EIG_RESIDUAL_TOL: Final = 1e-8
CONCURRENCE_CLIP_TOL: Final = 1e-10
RANK_RTOL: Final = 1e-8

# Hilbert space
NUM_QUBITS: Final = 3
DIM: Final = 2**NUM_QUBITS

# Spin system of the three-fluorine molecule (Hz)
DEFAULT_J12: Final = 69.65
DEFAULT_J13: Final = 47.67
DEFAULT_J23: Final = -128.23

# Pseudopure polarization at room temperature
DEFAULT_EPSILON: Final = 1e-5

# Reference pulse angles of the preparation sequence (radians); theta_3 is
# quoted without its sign.
REFERENCE_THETA_1: Final = 1.216 * math.pi / 2
REFERENCE_THETA_2: Final = 11 * math.pi / 12
REFERENCE_THETA_3: Final = 5 * math.pi / 12

# Canonical seven-setting tomography protocol
TOMOGRAPHY_SETTINGS: Final = ("III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX")

# Ideal values
S_STATE_T26: Final = 1 + 4 * math.sqrt(3)
T26_CLASSICAL_BOUND: Final = 5.0
S_STATE_NEGATIVITY: Final = 2 * math.sqrt(2) / 3
S_STATE_CONCURRENCE: Final = 2 * (1 / math.sqrt(12) - 1 / 6)

# Experimental reference values (value, quoted uncertainty)
REFERENCE_FIDELITY: Final = (0.949, 0.003)
REFERENCE_NEGATIVITY: Final = (0.794, 0.015)
REFERENCE_T26: Final = (6.531, 0.125)
REFERENCE_CONCURRENCE_RANGE: Final = (0.094, 0.32)

# GRAPE defaults
DEFAULT_GRAPE_SEGMENTS: Final = 100
DEFAULT_GRAPE_MAX_ITERS: Final = 2000
DEFAULT_GRAPE_TARGET_FIDELITY: Final = 0.99
DEFAULT_GRAPE_MAX_AMPLITUDE: Final = 2 * math.pi * 1000.0

# Tomography reconstruction
DEFAULT_RECONSTRUCT_TOL: Final = 1e-10
DEFAULT_RECONSTRUCT_MAX_ITERS: Final = 20000

# Calibration bisection
CALIBRATION_TOL: Final = 1e-6
CALIBRATION_MAX_ITERS: Final = 60

# Incompatibility sweep
DEFAULT_SWEEP_POINTS: Final = 181
