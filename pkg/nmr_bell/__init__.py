"""
Desk-scale simulator for the three-qubit |S⟩ state.

Prepares |S⟩ at gate or NMR pulse level, reconstructs it from simulated
readout, certifies it with negativities, concurrences and the T26 Bell
functional, and fits the noise that reproduces measured values.
"""

from .config import PipelineConfig
from .pipeline import Pipeline, PipelineReport, run_pipeline

__version__ = "2026.1.0"

__all__ = ["Pipeline", "PipelineConfig", "PipelineReport", "__version__", "run_pipeline"]
