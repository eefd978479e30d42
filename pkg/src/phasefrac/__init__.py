"""Supervised phase-fraction estimation for powder diffraction spectra."""

from .core import (
    AngleGrid,
    Composition,
    Dataset,
    PhaseLibrary,
    Spectrum,
    normalize_composition,
    validate_dataset,
)
from .metrics import EvalReport, cosine_similarity, dominant_phase_accuracy, evaluate, mae, rho
from .solver import (
    FitTrace,
    SolverConfig,
    estimate_composition,
    fit_phase_library,
    sse,
    update_fraction,
    update_phase_intensity,
)
from .validation import CvResult, loocv, resubstitution_eval

__version__ = "0.1.0"
