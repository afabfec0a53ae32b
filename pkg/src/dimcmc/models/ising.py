"""Ising model on a rectangular lattice with free boundary.

States are (rows, cols) int8 arrays with entries in {-1, +1}. The single
sufficient statistic is the sum of horizontal and vertical neighbor
products; no wraparound.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .base import UniformBox, as_theta


def validate_lattice(spins) -> np.ndarray:
    spins = np.asarray(spins)
    if spins.ndim != 2:
        raise ValueError("lattice must be two-dimensional")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("lattice entries must be -1 or +1")
    return np.ascontiguousarray(spins, dtype=np.int8)


@dataclass(frozen=True)
class IsingModel:
    rows: int
    cols: int
    prior: UniformBox = field(default_factory=lambda: UniformBox(np.zeros(1), np.ones(1)))

    kind = "ising"
    is_expfam = True

    @property
    def param_dim(self) -> int:
        return 1

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols

    def validate_state(self, state) -> np.ndarray:
        state = validate_lattice(state)
        if state.shape != (self.rows, self.cols):
            raise ValueError(f"lattice shape {state.shape} != {(self.rows, self.cols)}")
        return state

    def coerce(self, state) -> np.ndarray:
        """Trust states in canonical layout (our kernels only produce those)."""
        if (
            isinstance(state, np.ndarray)
            and state.dtype == np.int8
            and state.flags["C_CONTIGUOUS"]
            and state.shape == (self.rows, self.cols)
        ):
            return state
        return self.validate_state(state)

    def suff_stat(self, state) -> np.ndarray:
        return np.array([_kernels.ising_suff(self.validate_state(state))], dtype=np.float64)

    def _stat(self, state) -> np.ndarray:
        return np.array([_kernels.ising_suff(self.coerce(state))], dtype=np.float64)

    def log_h(self, state, theta) -> float:
        theta = as_theta(theta, 1)
        return float(theta[0] * _kernels.ising_suff(self.validate_state(state)))

    def log_h_stat(self, stat, theta) -> float:
        return float(np.dot(as_theta(theta, 1), stat))

    def conditional_prob(self, state, site, theta) -> float:
        """P(spin at flat site index = +1 | rest)."""
        state = self.validate_state(state)
        theta = as_theta(theta, 1)
        i, j = divmod(int(site), self.cols)
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"site {site} outside lattice")
        s = 0
        if i > 0:
            s += state[i - 1, j]
        if i < self.rows - 1:
            s += state[i + 1, j]
        if j > 0:
            s += state[i, j - 1]
        if j < self.cols - 1:
            s += state[i, j + 1]
        return float(1.0 / (1.0 + np.exp(-2.0 * theta[0] * s)))

    @property
    def n_sites_or_dyads(self) -> int:
        return self.n_sites

    def constant_state(self, value=1) -> np.ndarray:
        return np.full((self.rows, self.cols), value, dtype=np.int8)
