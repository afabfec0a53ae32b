"""Particle sets anchoring the adaptive algorithms.

Candidates come from a tempered (fractional) chain that over-disperses
relative to the posterior; a greedy max-min pass then picks a subset with
near-uniform coverage. Distances are measured after min-max standardizing
each coordinate to [0, 1] over the candidate set.
"""

from dataclasses import dataclass

import numpy as np

from .models import as_theta


@dataclass(frozen=True)
class ParticleSet:
    theta: np.ndarray  # (d, p), original scale
    lo: np.ndarray     # standardization bounds from the construction inputs
    hi: np.ndarray

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta, dtype=np.float64))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=np.float64))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=np.float64))
        if len(np.unique(theta, axis=0)) != len(theta):
            raise ValueError("particles must be distinct")

    def __len__(self) -> int:
        return self.theta.shape[0]

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def _span(self) -> np.ndarray:
        span = self.hi - self.lo
        return np.where(span > 0, span, 1.0)

    def scale(self, points) -> np.ndarray:
        return (np.atleast_2d(points) - self.lo) / self._span()

    @property
    def scaled(self) -> np.ndarray:
        return self.scale(self.theta)

    def distance_matrix(self) -> np.ndarray:
        s = self.scaled
        diff = s[:, None, :] - s[None, :, :]
        return np.sqrt((diff**2).sum(axis=2))

    def knn_lists(self, k: int) -> np.ndarray:
        """Indices of the k nearest other particles, row per particle."""
        k = min(k, len(self) - 1)
        if k < 1:
            raise ValueError("need at least two particles for neighbor moves")
        dm = self.distance_matrix()
        np.fill_diagonal(dm, np.inf)
        return np.argsort(dm, axis=1)[:, :k].astype(np.int64)

    def kernel_nearest(self, theta, h: int) -> np.ndarray:
        """Indices of the h particles nearest to an arbitrary point."""
        theta = as_theta(theta, self.dim)
        d = np.sqrt(((self.scaled - self.scale(theta)) ** 2).sum(axis=1))
        return np.argsort(d)[: min(h, len(self))]

    @classmethod
    def from_points(cls, thetas) -> "ParticleSet":
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        return cls(thetas, thetas.min(axis=0), thetas.max(axis=0))

    def save_csv(self, path):
        np.savetxt(path, self.theta, delimiter=",",
                   header=",".join(f"theta_{i+1}" for i in range(self.dim)))

    @classmethod
    def load_csv(cls, path) -> "ParticleSet":
        return cls.from_points(np.loadtxt(path, delimiter=",", ndmin=2))


def maxmin_select(candidates, d: int, rng) -> ParticleSet:
    """Greedy max-min subset of size d over standardized coordinates.

    The first pick is a seeded uniform draw; each later pick maximizes its
    distance to the closest already-selected particle.
    """
    from .samplers import _as_generator

    cands = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    distinct = np.unique(cands, axis=0)
    if not (1 <= d <= len(distinct)):
        raise ValueError(f"cannot select {d} particles from {len(distinct)} distinct candidates")
    lo, hi = cands.min(axis=0), cands.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    scaled = (distinct - lo) / span

    gen = _as_generator(rng)
    first = int(gen.integers(len(distinct)))
    chosen = [first]
    mind = np.sqrt(((scaled - scaled[first]) ** 2).sum(axis=1))
    mind[first] = -np.inf
    for _ in range(d - 1):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        dn = np.sqrt(((scaled - scaled[nxt]) ** 2).sum(axis=1))
        mind = np.minimum(mind, dn)
        mind[nxt] = -np.inf
    return ParticleSet(distinct[np.array(chosen)], lo, hi)


def fractional_dmh(model, data, zeta, n_draws, cfg, proposal, rng) -> np.ndarray:
    """n_draws post-burn-in draws from DMH with tempered acceptance alpha**zeta.

    cfg supplies burn-in, thinning, and the inner kernel; its iteration
    count is recomputed from n_draws.
    """
    from .algorithms import ChainConfig, _ratio_chain

    if not (0.0 < zeta <= 1.0):
        raise ValueError("fractional exponent must lie in (0, 1]")
    run_cfg = ChainConfig(
        iterations=cfg.burn_in + n_draws * cfg.thin, burn_in=cfg.burn_in,
        thin=cfg.thin, seed=cfg.seed, inner=cfg.inner,
    )
    trace = _ratio_chain(
        model, data, run_cfg, proposal, rng, n_replicates=1,
        algorithm="fractional_dmh", accept_power=float(zeta),
    )
    return trace.samples
