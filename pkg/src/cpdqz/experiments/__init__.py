"""Synthetic, direction-of-arrival and fluorescence experiments."""
from .doa import AngleEstimate, DoaScenario, doa_build_tensor, doa_estimate_angles, run_doa_experiment
from .fluorescence import load_fluorescence, run_fluorescence_experiment, synthetic_fluorescence
from .records import ExperimentRecord, emit_summary, summarize
from .synthetic import SweepConfig, random_model, run_synthetic_sweep

__all__ = [
    "AngleEstimate", "DoaScenario", "ExperimentRecord", "SweepConfig",
    "doa_build_tensor", "doa_estimate_angles", "emit_summary", "load_fluorescence",
    "random_model", "run_doa_experiment", "run_fluorescence_experiment", "run_synthetic_sweep",
    "summarize", "synthetic_fluorescence",
]
