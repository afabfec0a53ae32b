"""Shared model-facing types: parameter vectors, box priors, validation."""

from dataclasses import dataclass

import numpy as np


def as_theta(values, dim=None) -> np.ndarray:
    """Coerce to a finite float64 parameter vector, optionally of fixed length."""
    theta = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if theta.ndim != 1:
        raise ValueError("parameter vector must be one-dimensional")
    if dim is not None and theta.shape[0] != dim:
        raise ValueError(f"parameter vector has length {theta.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameter vector must be finite")
    return theta


@dataclass(frozen=True)
class UniformBox:
    """Independent uniform priors on an axis-aligned box."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("prior bounds must be matching 1-d arrays")
        if not np.all(hi > lo):
            raise ValueError("prior intervals must have positive width")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def contains(self, theta) -> bool:
        return bool(np.all(theta >= self.lo) & np.all(theta <= self.hi))

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def sample(self, gen: np.random.Generator) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * gen.random(self.dim)

    def clip(self, theta) -> np.ndarray:
        return np.clip(theta, self.lo, self.hi)
