"""Pseudo-spectral ETD solver for the no-slope-selection thin-film equation."""

from .kernels import BACKEND
from .model import ModelParams, StabilityConstants, energy, stability_constants
from .schemes import SchemeState, init_state
from .spectral import SpectralGrid, make_grid

__all__ = [
    "BACKEND",
    "ModelParams",
    "SchemeState",
    "SpectralGrid",
    "StabilityConstants",
    "energy",
    "init_state",
    "make_grid",
    "stability_constants",
]
