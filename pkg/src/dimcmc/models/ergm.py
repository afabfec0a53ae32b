"""Undirected exponential random graph model with star and triangle terms.

States are symmetric (n, n) int8 adjacency matrices with zero diagonal.
Sufficient statistics are (edges, 2-stars, 3-stars, triangles); the edge
count is the number of undirected edges, counted once.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .base import UniformBox, as_theta


def validate_graph(adj) -> np.ndarray:
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.array_equal(adj, adj.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(adj) != 0):
        raise ValueError("adjacency diagonal must be zero")
    if not np.all((adj == 0) | (adj == 1)):
        raise ValueError("adjacency entries must be 0 or 1")
    return np.ascontiguousarray(adj, dtype=np.int8)


def dyad_index_pairs(n: int) -> np.ndarray:
    """Lexicographic (i, j) with i < j; row k is the k-th dyad."""
    iu = np.triu_indices(n, k=1)
    return np.column_stack(iu)


@dataclass(frozen=True)
class ErgmModel:
    n_nodes: int
    prior: UniformBox = field(
        default_factory=lambda: UniformBox(-10.0 * np.ones(4), 10.0 * np.ones(4))
    )

    kind = "ergm"
    is_expfam = True

    @property
    def param_dim(self) -> int:
        return 4

    @property
    def n_dyads(self) -> int:
        return self.n_nodes * (self.n_nodes - 1) // 2

    def validate_state(self, state) -> np.ndarray:
        state = validate_graph(state)
        if state.shape[0] != self.n_nodes:
            raise ValueError(f"graph has {state.shape[0]} nodes, expected {self.n_nodes}")
        return state

    def coerce(self, state) -> np.ndarray:
        """Trust states in canonical layout (our kernels only produce those)."""
        if (
            isinstance(state, np.ndarray)
            and state.dtype == np.int8
            and state.flags["C_CONTIGUOUS"]
            and state.shape == (self.n_nodes, self.n_nodes)
        ):
            return state
        return self.validate_state(state)

    def suff_stat(self, state) -> np.ndarray:
        return _kernels.ergm_suff(self.validate_state(state))

    def _stat(self, state) -> np.ndarray:
        return _kernels.ergm_suff(self.coerce(state))

    def log_h(self, state, theta) -> float:
        theta = as_theta(theta, 4)
        return float(np.dot(theta, self.suff_stat(state)))

    def log_h_stat(self, stat, theta) -> float:
        return float(np.dot(as_theta(theta, 4), stat))

    def change_stat(self, state, i, j) -> np.ndarray:
        """Suff-stat change from adding edge (i, j) to the state without it."""
        adj = self.validate_state(state).copy()
        adj[i, j] = adj[j, i] = 0
        ds = np.empty(4, dtype=np.float64)
        _kernels._ergm_change_stat(adj, i, j, ds)
        return ds

    def conditional_prob(self, state, dyad, theta) -> float:
        """P(dyad = 1 | rest) for the lexicographic dyad index."""
        theta = as_theta(theta, 4)
        pairs = dyad_index_pairs(self.n_nodes)
        if not (0 <= int(dyad) < len(pairs)):
            raise IndexError(f"dyad {dyad} outside range")
        i, j = pairs[int(dyad)]
        ds = self.change_stat(state, int(i), int(j))
        return float(1.0 / (1.0 + np.exp(-np.dot(theta, ds))))

    @property
    def n_sites_or_dyads(self) -> int:
        return self.n_dyads

    def empty_state(self) -> np.ndarray:
        return np.zeros((self.n_nodes, self.n_nodes), dtype=np.int8)
