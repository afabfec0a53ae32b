"""Posterior sampling for models with intractable normalizing functions."""

__version__ = "0.1.0"

from .rng import RngStream
from . import models, samplers, algorithms, particles, diagnostics

__all__ = ["RngStream", "models", "samplers", "algorithms", "particles", "diagnostics"]
