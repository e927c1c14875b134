"""Gaussian moment simulation and optimization of multi-pass atom-light spin squeezing."""
from .errors import ConvergenceError, ModelViolationError, ParameterError
from .gaussian import GaussianState
from .kernels import ENGINE
from .metrics import SqueezingResult, xi_squared
from .multipass import SchemeConfig, SimOutput, simulate
from .params import Coupling, PhysicalParams, derive_coupling

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "ModelViolationError", "ParameterError", "GaussianState", "ENGINE",
    "SqueezingResult", "xi_squared", "SchemeConfig", "SimOutput", "simulate", "Coupling",
    "PhysicalParams", "derive_coupling",
]
