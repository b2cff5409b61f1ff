"""Pseudo-spectral solver for the 2D Voigt-Boussinesq equations on the torus."""

__version__ = "0.1.0"

from .dynamics import State, Tendency, buoyancy_term, rhs
from .errors import (
    CheckpointFormatError,
    ConfigError,
    ConstraintViolation,
    MaxStepsExceeded,
    NonFiniteError,
    VoigtError,
)
from .spectral import SpectralGrid, VoigtParams, make_grid
from .timestepper import StepControl, integrate, rk4_step, stable_dt

__all__ = [
    "CheckpointFormatError",
    "ConfigError",
    "ConstraintViolation",
    "MaxStepsExceeded",
    "NonFiniteError",
    "SpectralGrid",
    "State",
    "StepControl",
    "Tendency",
    "VoigtError",
    "VoigtParams",
    "buoyancy_term",
    "integrate",
    "make_grid",
    "rhs",
    "rk4_step",
    "stable_dt",
]
