from .errors import AdmissibilityError, BubbleError, ConfigError, ConvergenceError
from .spectral_core import AnalyticWeight, ComplexSpectrum, SpectralField, wiener_norm
from .geometry import BubbleState, FluidConstants, PhysicalParams, derive_params, initial_state, length_from_theta
from .evolution import SolverConfig, TrajectoryRecord, full_rhs, run, step, write_outputs
from .config import RunConfig, load_config

__all__ = [
    "AdmissibilityError", "BubbleError", "ConfigError", "ConvergenceError",
    "AnalyticWeight", "ComplexSpectrum", "SpectralField", "wiener_norm",
    "BubbleState", "FluidConstants", "PhysicalParams", "derive_params", "initial_state", "length_from_theta",
    "SolverConfig", "TrajectoryRecord", "full_rhs", "run", "step", "write_outputs",
    "RunConfig", "load_config",
]
