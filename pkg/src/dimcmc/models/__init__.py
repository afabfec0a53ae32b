"""Probability models: lattices, graphs, point patterns, and their oracles."""

import numpy as np

from .base import UniformBox, as_theta
from .ergm import ErgmModel, dyad_index_pairs, validate_graph
from .exact import exact_log_z, grid_posterior, stat_table
from .ising import IsingModel, validate_lattice
from .mple import mple
from .pointprocess import (
    InteractionParams,
    PointPattern,
    PointProcessModel,
    derive_interaction,
    interaction_phi,
    read_pattern_csv,
    write_pattern_csv,
)

__all__ = [
    "UniformBox", "as_theta", "IsingModel", "ErgmModel", "PointProcessModel",
    "PointPattern", "InteractionParams", "derive_interaction", "interaction_phi",
    "validate_lattice", "validate_graph", "dyad_index_pairs",
    "read_pattern_csv", "write_pattern_csv",
    "ising_suff_stat", "ergm_suff_stat", "unnorm_log_density", "conditional_prob",
    "exact_log_z", "grid_posterior", "stat_table", "mple",
]


def ising_suff_stat(lattice) -> np.ndarray:
    """Neighbor product sum of a +-1 lattice, free boundary."""
    lattice = validate_lattice(lattice)
    return IsingModel(*lattice.shape).suff_stat(lattice)


def ergm_suff_stat(graph) -> np.ndarray:
    """(edges, 2-stars, 3-stars, triangles) of an undirected graph."""
    graph = validate_graph(graph)
    return ErgmModel(graph.shape[0]).suff_stat(graph)


def unnorm_log_density(model, state, theta) -> float:
    """log h(state | theta); -inf marks zero-density states."""
    return model.log_h(state, theta)


def conditional_prob(model, state, site, theta) -> float:
    """Full-conditional probability of +1 (lattice site) or 1 (graph dyad)."""
    return model.conditional_prob(state, site, theta)
