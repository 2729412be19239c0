"""Sparse hyperelastic model discovery for highly compressible elastomeric foams."""

__version__ = "0.1.0"

from .dataproc import Curve, FoamDataset, builtin_dataset, load_dataset
from .discovery import export_model, import_model, printed_model, run_grid, select_model
from .energy import ModelSpec, Term, energy, energy_partials, make_model, term_energy
from .kinematics import DeformationState, Mode, invariants, principal_stretches
from .report import FitReport, polyconvexity_flags, r_squared
from .stress import shear_stress, uniaxial_stress, zero_stress_residual
from .training import Architecture, TrainConfig, fit, loss, sparsity_sweep

__all__ = [
    "Curve",
    "FoamDataset",
    "builtin_dataset",
    "load_dataset",
    "ModelSpec",
    "Term",
    "make_model",
    "energy",
    "energy_partials",
    "term_energy",
    "DeformationState",
    "Mode",
    "invariants",
    "principal_stretches",
    "uniaxial_stress",
    "shear_stress",
    "zero_stress_residual",
    "Architecture",
    "TrainConfig",
    "fit",
    "loss",
    "sparsity_sweep",
    "FitReport",
    "r_squared",
    "polyconvexity_flags",
    "run_grid",
    "select_model",
    "printed_model",
    "export_model",
    "import_model",
]
