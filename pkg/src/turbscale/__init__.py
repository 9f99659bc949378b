"""Structure functions, extended self-similarity and Reynolds-number-dependent
scaling exponents in the inertial range of turbulence."""

__version__ = "0.1.0"

from .errors import ContractError, DegenerateInputError, DomainError, ParseError
from .scales import FlowParameters, kolmogorov_scale, reynolds_number, velocity_scale
from .synth import (SimilarityModel, SyntheticSpec, VelocitySignal, model_d2, model_d3,
                    synth_ess_dataset, synth_velocity_signal)
from .estimator import StructureFunctionCurve, default_lag_grid, structure_function
from .ess import (EssPointSet, SlopeProfile, anchored_local_slopes, build_ess,
                  split_dissipation_range, successive_slopes)
from .fit import (Comparison, LineFit, SimilarityFit, analyze, compare_hypotheses, fit_incomplete_similarity,
                  fit_line, fit_per_re, fit_shared_slope)

__all__ = [
    "ContractError", "DegenerateInputError", "DomainError", "ParseError",
    "FlowParameters", "kolmogorov_scale", "reynolds_number", "velocity_scale",
    "SimilarityModel", "SyntheticSpec", "VelocitySignal", "model_d2", "model_d3",
    "synth_ess_dataset", "synth_velocity_signal",
    "StructureFunctionCurve", "default_lag_grid", "structure_function",
    "EssPointSet", "SlopeProfile", "anchored_local_slopes", "build_ess",
    "split_dissipation_range", "successive_slopes",
    "Comparison", "LineFit", "SimilarityFit", "analyze", "compare_hypotheses",
    "fit_incomplete_similarity", "fit_line", "fit_per_re", "fit_shared_slope",
]
