"""Brute-force normalizing constants for tiny exponential-family instances.

Enumeration aggregates states into a sufficient-statistic table (unique
stat value, state count), after which log Z at any parameter point is a
single log-sum-exp over the table. Refuses state spaces above 2**20.
"""

from functools import lru_cache

import numpy as np

from ..errors import StateSpaceError
from .base import as_theta
from .ergm import ErgmModel
from .ising import IsingModel

MAX_STATES = 2**20


def _bit_states(n_bits: int) -> np.ndarray:
    """All 0/1 configurations of n_bits as a (2**n_bits, n_bits) int8 array."""
    codes = np.arange(2**n_bits, dtype=np.uint32)
    return ((codes[:, None] >> np.arange(n_bits, dtype=np.uint32)[None, :]) & 1).astype(np.int8)


@lru_cache(maxsize=8)
def ising_stat_table(rows: int, cols: int):
    """Unique Ising suff-stat values and their state counts."""
    sites = rows * cols
    if 2**sites > MAX_STATES:
        raise StateSpaceError(f"2^{sites} lattice states exceed the 2^20 enumeration cap")
    spins = (2 * _bit_states(sites) - 1).reshape(-1, rows, cols)
    s = (spins[:, :, :-1] * spins[:, :, 1:]).sum(axis=(1, 2)) + (
        spins[:, :-1, :] * spins[:, 1:, :]
    ).sum(axis=(1, 2))
    vals, counts = np.unique(s, return_counts=True)
    return vals.astype(np.float64)[:, None], counts.astype(np.float64)


@lru_cache(maxsize=8)
def ergm_stat_table(n_nodes: int):
    """Unique ERGM suff-stat rows and their graph counts."""
    ndyads = n_nodes * (n_nodes - 1) // 2
    if 2**ndyads > MAX_STATES:
        raise StateSpaceError(f"2^{ndyads} graphs exceed the 2^20 enumeration cap")
    dyads = _bit_states(ndyads)
    iu = np.triu_indices(n_nodes, k=1)
    adj = np.zeros((dyads.shape[0], n_nodes, n_nodes), dtype=np.int8)
    adj[:, iu[0], iu[1]] = dyads
    adj += adj.transpose(0, 2, 1)
    deg = adj.sum(axis=2).astype(np.int64)
    edges = deg.sum(axis=1) // 2
    s2 = (deg * (deg - 1) // 2).sum(axis=1)
    s3 = (deg * (deg - 1) * (deg - 2) // 6).sum(axis=1)
    a = adj.astype(np.int64)
    tri = np.einsum("nij,njk,nki->n", a, a, a) // 6
    stats = np.column_stack([edges, s2, s3, tri]).astype(np.float64)
    vals, counts = np.unique(stats, axis=0, return_counts=True)
    return vals, counts.astype(np.float64)


def stat_table(model):
    if isinstance(model, IsingModel):
        return ising_stat_table(model.rows, model.cols)
    if isinstance(model, ErgmModel):
        return ergm_stat_table(model.n_nodes)
    raise StateSpaceError(f"no exact enumeration for model kind {model.kind!r}")


def log_z_from_table(vals, counts, theta) -> float:
    a = vals @ theta + np.log(counts)
    m = a.max()
    return float(m + np.log(np.exp(a - m).sum()))


def exact_log_z(model, theta) -> float:
    """log Z(theta) by exhaustive enumeration (running log-sum-exp)."""
    theta = as_theta(theta, model.param_dim)
    vals, counts = stat_table(model)
    return log_z_from_table(vals, counts, theta)


def grid_posterior(model, data_stat, grid):
    """Normalized exact posterior over a 1-d theta grid, with summaries.

    Returns (weights, mean, sd, (hpd_lo, hpd_hi)) where weights sum to one.
    Assumes a uniform prior over the grid's range.
    """
    grid = np.asarray(grid, dtype=np.float64)
    vals, counts = stat_table(model)
    s = float(np.asarray(data_stat).reshape(-1)[0])
    log_post = np.array([g * s - log_z_from_table(vals, counts, np.array([g])) for g in grid])
    log_post -= log_post.max()
    w = np.exp(log_post)
    w /= w.sum()
    mean = float(np.dot(w, grid))
    sd = float(np.sqrt(np.dot(w, (grid - mean) ** 2)))
    order = np.argsort(w)[::-1]
    keep = order[: np.searchsorted(np.cumsum(w[order]), 0.95) + 1]
    lo, hi = float(grid[keep].min()), float(grid[keep].max())
    return w, mean, sd, (lo, hi)
