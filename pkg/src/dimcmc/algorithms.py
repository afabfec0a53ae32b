"""Outer posterior samplers for doubly-intractable targets.

Eight chains over a common driver vocabulary: auxiliary-variable methods
(AVM, exchange, bridged exchange, DMH, adaptive exchange) and
likelihood-approximation methods (ALR, noisy DMH, Russian roulette).
Acceptance arithmetic is done entirely in log space from unnormalized
densities; no code path here evaluates a normalizing constant.

Stream layout: path (0,) seeds the chain-level draws (proposal noise and
acceptance uniforms, pre-drawn in blocks); (1, i, ...) seeds iteration i's
auxiliary randomness (perfect-sampling epochs, replicate blocks, roulette
estimates); (2, i, ...) seeds extras (bridging sweeps, roulette survival
draws); (3, ...) seeds initialization. Shared cores guarantee the
reduction identities: DMH is the one-replicate noisy chain, the plain
exchange algorithm is bridging with K = 0.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DegenerateStoreError, RouletteCapError
from .models import IsingModel, as_theta, mple
from .particles import ParticleSet
from .rng import RngStream
from .samplers import (
    InnerKernelConfig,
    cftp_perfect_sample,
    default_inner,
    inner_run,
    replicate_pair_log_h,
    replicate_suff_stats,
    tempered_transition,
)

_P_MAIN, _P_AUX, _P_EXTRA, _P_INIT = 0, 1, 2, 3
_LN10 = np.log(10.0)


def log_mean_exp(vals) -> float:
    """log of the mean of exp(vals), max-subtracted; -inf for all-zero weights."""
    vals = np.asarray(vals, dtype=np.float64)
    m = float(np.max(vals))
    if m == -np.inf:
        return -np.inf
    return m + float(np.log(np.mean(np.exp(vals - m))))


def log_sum_exp(vals) -> float:
    vals = np.asarray(vals, dtype=np.float64)
    m = float(np.max(vals))
    if m == -np.inf:
        return -np.inf
    return m + float(np.log(np.sum(np.exp(vals - m))))


# ---------------------------------------------------------------------------
# Configuration and trace types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProposalSpec:
    """Symmetric random-walk proposal: per-component scales or a full covariance."""

    scales: np.ndarray
    cov: np.ndarray | None = None

    def __post_init__(self):
        scales = np.atleast_1d(np.asarray(self.scales, dtype=np.float64))
        object.__setattr__(self, "scales", scales)
        if np.any(scales <= 0):
            raise ValueError("proposal scales must be strictly positive")
        if self.cov is not None:
            chol = np.linalg.cholesky(np.asarray(self.cov, dtype=np.float64))
            object.__setattr__(self, "cov", np.asarray(self.cov, dtype=np.float64))
            object.__setattr__(self, "_chol", chol)

    def step(self, theta, z) -> np.ndarray:
        if self.cov is not None:
            return theta + self._chol @ z
        return theta + self.scales * z


@dataclass(frozen=True)
class AexSettings:
    """Auxiliary-chain settings for the adaptive exchange algorithm."""

    n_pre: int = 100_000
    pre_burn: int = 0
    pre_thin: int = 20
    n0: int = 20_000
    k_neighbors: int = 20
    ks_base_exp: float = 100.0  # truncation region [0, 10^(base + 10 s)]^d
    inner: InnerKernelConfig = field(default_factory=InnerKernelConfig)


@dataclass(frozen=True)
class AlrSettings:
    """Stochastic-approximation settings for the ALR algorithm."""

    gamma0: float = 1.0
    eps1: float = 1e-3
    eps2: float = 0.2
    bandwidth: int = 10
    inner: InnerKernelConfig = field(default_factory=InnerKernelConfig)
    epoch_cap: int = 30_000_000


@dataclass(frozen=True)
class RouletteConfig:
    """Geometric-series roulette settings."""

    c: float = 0.4
    n_replicates: int = 1000
    theta0: np.ndarray | None = None
    inner: InnerKernelConfig | None = None
    tau_cap: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.c < 1.0):
            raise ValueError("roulette constant must lie in (0, 1)")
        if self.n_replicates < 1:
            raise ValueError("need at least one replicate per estimate")


@dataclass(frozen=True)
class ChainConfig:
    iterations: int
    burn_in: int = 0
    thin: int = 1
    seed: int = 0
    inner: InnerKernelConfig | None = None
    n_replicates: int = 100       # noisy DMH
    bridge_levels: int = 0        # K
    roulette: RouletteConfig | None = None
    aex: AexSettings | None = None
    alr: AlrSettings | None = None

    def __post_init__(self):
        if not (self.iterations > self.burn_in >= 0):
            raise ValueError("need iterations > burn_in >= 0")
        if self.thin < 1:
            raise ValueError("thinning interval must be >= 1")

    @property
    def n_retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class ChainTrace:
    samples: np.ndarray       # (retained, p)
    accepted: np.ndarray      # (iterations,) per-iteration indicator
    wall_time: float
    algorithm: str
    burn_in: int
    meta: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def acceptance_rate(self) -> float:
        post = self.accepted[self.burn_in:]
        return float(post.mean()) if len(post) else float("nan")


class _Recorder:
    """Retention bookkeeping shared by every chain driver."""

    def __init__(self, cfg: ChainConfig, dim: int):
        self.cfg = cfg
        self.samples = np.empty((cfg.n_retained, dim))
        self.accepted = np.zeros(cfg.iterations, dtype=np.uint8)
        self.row = 0

    def record(self, i, theta, accepted):
        if accepted:
            self.accepted[i - 1] = 1
        if i > self.cfg.burn_in and (i - self.cfg.burn_in) % self.cfg.thin == 0:
            self.samples[self.row] = theta
            self.row += 1

    def trace(self, algorithm, t0, meta=None, extras=None) -> ChainTrace:
        assert self.row == self.cfg.n_retained
        base = {"iterations": self.cfg.iterations, "burn_in": self.cfg.burn_in,
                "thin": self.cfg.thin, "seed": self.cfg.seed}
        base.update(meta or {})
        return ChainTrace(
            samples=self.samples, accepted=self.accepted,
            wall_time=time.perf_counter() - t0, algorithm=algorithm,
            burn_in=self.cfg.burn_in, meta=base, extras=extras or {},
        )


def _in_support(model, theta) -> bool:
    check = getattr(model, "in_support", None)
    if check is not None:
        return check(theta)
    return model.prior.contains(theta)


def _initial_theta(model, data) -> np.ndarray:
    """Pseudolikelihood start for exponential families, prior midpoint otherwise."""
    if model.is_expfam:
        try:
            return mple(model, data)
        except Exception:
            return model.prior.midpoint()
    return model.prior.midpoint()


def _main_draws(cfg: ChainConfig, rng: RngStream, dim: int):
    gen = rng.split(_P_MAIN).generator()
    zs = gen.standard_normal((cfg.iterations, dim))
    us = gen.random(cfg.iterations)
    return zs, np.log(us)


def _require_cftp(model, algorithm):
    if not isinstance(model, IsingModel):
        raise ConfigurationError(
            f"{algorithm} requires perfect sampling, which is available only "
            f"for the ferromagnetic lattice model (got {model.kind})"
        )


# ---------------------------------------------------------------------------
# AVM and the exchange family (perfect-sampling methods)
# ---------------------------------------------------------------------------


def run_avm(model, data, cfg: ChainConfig, proposal: ProposalSpec, rng: RngStream) -> ChainTrace:
    """Auxiliary-variable chain with h(.|theta_hat)/Z(theta_hat) as the y-proposal."""
    _require_cftp(model, "AVM")
    t0 = time.perf_counter()
    data = model.validate_state(data)
    theta_hat = mple(model, data)
    sx = model.suff_stat(data)
    theta = theta_hat.copy()
    y = cftp_perfect_sample(model, theta, rng.split(_P_INIT))
    sy = model.suff_stat(y)
    zs, lus = _main_draws(cfg, rng, model.param_dim)
    rec = _Recorder(cfg, model.param_dim)
    for i in range(1, cfg.iterations + 1):
        theta_new = proposal.step(theta, zs[i - 1])
        accept = False
        if _in_support(model, theta_new):
            y_new = cftp_perfect_sample(model, theta_new, rng.split(_P_AUX, i))
            sy_new = model.suff_stat(y_new)
            la = (
                np.dot(theta_new - theta, sx)
                + np.dot(theta_hat - theta_new, sy_new)
                + np.dot(theta - theta_hat, sy)
            )
            if lus[i - 1] < la:
                theta, sy, accept = theta_new, sy_new, True
        rec.record(i, theta, accept)
    return rec.trace("avm", t0, meta={"theta_hat": theta_hat.tolist()})


def _exchange_core(model, data, cfg, proposal, rng, k_levels, algorithm) -> ChainTrace:
    _require_cftp(model, algorithm)
    if k_levels < 0:
        raise ConfigurationError("bridge level count must be >= 0")
    t0 = time.perf_counter()
    data = model.validate_state(data)
    sx = model.suff_stat(data)
    theta = _initial_theta(model, data)
    zs, lus = _main_draws(cfg, rng, model.param_dim)
    rec = _Recorder(cfg, model.param_dim)
    for i in range(1, cfg.iterations + 1):
        theta_new = proposal.step(theta, zs[i - 1])
        accept = False
        if _in_support(model, theta_new):
            y = cftp_perfect_sample(model, theta_new, rng.split(_P_AUX, i))
            dstep = (theta - theta_new) / (k_levels + 1.0)
            la = np.dot(theta_new - theta, sx) + np.dot(dstep, model.suff_stat(y))
            for k in range(1, k_levels + 1):
                y = tempered_transition(
                    model, y, theta, theta_new, k / (k_levels + 1.0), rng.split(_P_EXTRA, i, k)
                )
                la += np.dot(dstep, model.suff_stat(y))
            if lus[i - 1] < la:
                theta, accept = theta_new, True
        rec.record(i, theta, accept)
    return rec.trace(algorithm, t0, meta={"bridge_levels": k_levels})


def run_exchange(model, data, cfg: ChainConfig, proposal, rng: RngStream) -> ChainTrace:
    """Exchange algorithm: swap acceptance with an exact auxiliary draw."""
    return _exchange_core(model, data, cfg, proposal, rng, 0, "exchange")


def run_exchange_bridging(model, data, cfg: ChainConfig, proposal, rng: RngStream) -> ChainTrace:
    """Exchange with K annealed bridging sweeps between theta' and theta."""
    return _exchange_core(
        model, data, cfg, proposal, rng, cfg.bridge_levels, "exchange_bridging"
    )


# ---------------------------------------------------------------------------
# DMH and noisy DMH (inner-sampler methods)
# ---------------------------------------------------------------------------


def _ratio_chain(model, data, cfg, proposal, rng, n_replicates, algorithm,
                 accept_power=1.0) -> ChainTrace:
    """Shared DMH core: N inner runs from the data at theta', averaged importance ratio."""
    if n_replicates < 1:
        raise ConfigurationError("need at least one auxiliary replicate")
    t0 = time.perf_counter()
    data = model.validate_state(data)
    inner = cfg.inner or default_inner(model, "sampling")
    theta = _initial_theta(model, data)
    expfam = model.is_expfam
    sx = model.suff_stat(data) if expfam else None
    stat_x = None if expfam else model.stored_stat(data)
    lhx = None if expfam else model.log_h_stat(stat_x, theta)
    zs, lus = _main_draws(cfg, rng, model.param_dim)
    rec = _Recorder(cfg, model.param_dim)
    for i in range(1, cfg.iterations + 1):
        theta_new = proposal.step(theta, zs[i - 1])
        accept = False
        if _in_support(model, theta_new):
            stream = rng.split(_P_AUX, i)
            if expfam:
                stats = replicate_suff_stats(model, data, theta_new, inner, stream, n_replicates)
                vals = stats @ (theta - theta_new)
                la = np.dot(theta_new - theta, sx) + log_mean_exp(vals)
            else:
                pair = replicate_pair_log_h(
                    model, data, theta_new, inner, stream, n_replicates, theta, theta_new
                )
                lhx_new = model.log_h_stat(stat_x, theta_new)
                la = lhx_new - lhx + log_mean_exp(pair[:, 0] - pair[:, 1])
            if lus[i - 1] < accept_power * la:
                theta, accept = theta_new, True
                if not expfam:
                    lhx = lhx_new
        rec.record(i, theta, accept)
    return rec.trace(algorithm, t0, meta={"n_replicates": n_replicates,
                                          "inner_cycles": inner.cycles})


def run_dmh(model, data, cfg: ChainConfig, proposal, rng: RngStream) -> ChainTrace:
    """Double Metropolis-Hastings: one m-cycle inner run from the data per step."""
    return _ratio_chain(model, data, cfg, proposal, rng, 1, "dmh")


def run_noisy_dmh(model, data, cfg: ChainConfig, proposal, rng: RngStream) -> ChainTrace:
    """DMH with an N-replicate averaged importance ratio in the acceptance."""
    return _ratio_chain(model, data, cfg, proposal, rng, cfg.n_replicates, "noisy_dmh")


# ---------------------------------------------------------------------------
# Adaptive exchange (AEX)
# ---------------------------------------------------------------------------


class CumulativeStore:
    """Append-only history of (particle index, stored statistic, abundance).

    Exponential-family statistics live in a dense matrix so resampling
    weights vectorize; other stored statistics fall back to a list with
    per-entry density evaluation.
    """

    def __init__(self, model, capacity: int):
        self.model = model
        self.expfam = model.is_expfam
        self.idx = np.empty(capacity, dtype=np.int64)
        self.logw = np.empty(capacity, dtype=np.float64)
        self.base_logh = np.empty(capacity, dtype=np.float64)
        self.stats = (
            np.empty((capacity, model.param_dim), dtype=np.float64) if self.expfam else [None] * capacity
        )
        self.n = 0

    def __len__(self) -> int:
        return self.n

    def append(self, particle_idx, stat, logw, base_logh):
        k = self.n
        self.idx[k] = particle_idx
        self.logw[k] = logw
        self.base_logh[k] = base_logh
        self.stats[k] = stat
        self.n = k + 1

    def stat_at(self, k):
        return self.stats[k]

    def log_weights(self, theta_new) -> np.ndarray:
        if self.expfam:
            lh = self.stats[: self.n] @ theta_new
        else:
            lh = np.array(
                [self.model.log_h_stat(self.stats[k], theta_new) for k in range(self.n)]
            )
        return self.logw[: self.n] + lh - self.base_logh[: self.n]


def aex_resample(store: CumulativeStore, theta_new, rng):
    """Draw one stored statistic with the dynamic importance weights."""
    from .samplers import _as_generator

    if len(store) == 0:
        raise DegenerateStoreError("cumulative store is empty")
    lw = store.log_weights(as_theta(theta_new, store.model.param_dim))
    m = np.max(lw)
    if not np.isfinite(m):
        raise DegenerateStoreError("all resampling weights are zero or non-finite")
    w = np.exp(lw - m)
    total = w.sum()
    u = _as_generator(rng).random() * total
    k = int(np.searchsorted(np.cumsum(w), u))
    k = min(k, len(store) - 1)
    return store.stat_at(k), k


class _AexAuxState:
    """Mutable auxiliary-chain state: index, data, abundances, truncation count."""

    def __init__(self, model, particles, data, settings, gen):
        self.model = model
        self.particles = particles
        self.data0 = data
        self.s = settings
        self.d = len(particles)
        self.knn = particles.knn_lists(min(settings.k_neighbors, self.d - 1)) if self.d > 1 else None
        self.log_w = np.zeros(self.d)
        self.sigma = 0
        self.step = 0
        self.i_cur = int(gen.integers(self.d))
        self.x = data.copy() if hasattr(data, "copy") else data
        self.stat = model._stat(self.x)
        self.visits = np.zeros(self.d, dtype=np.int64)

    def _log_h(self, theta) -> float:
        if self.model.is_expfam:
            return float(np.dot(self.stat, theta))
        return self.model.log_h_stat(self.stat, theta)

    def update(self, gen) -> tuple:
        """One auxiliary move + abundance update; returns the store entry."""
        th = self.particles.theta
        if self.d > 1 and gen.random() < 0.5:
            cand = self.knn[self.i_cur]
            i_new = int(cand[int(gen.integers(len(cand)))])
            la = (
                self.log_w[self.i_cur] - self.log_w[i_new]
                + self._log_h(th[i_new]) - self._log_h(th[self.i_cur])
            )
            if np.log(gen.random()) < la:
                self.i_cur = i_new
        else:
            self.x = inner_run(self.model, self.x, th[self.i_cur], self.s.inner, gen)
            self.stat = self.model._stat(self.x)
        self.step += 1
        self.visits[self.i_cur] += 1
        gain = self.s.n0 / max(self.s.n0, self.step)
        self.log_w -= gain / self.d
        self.log_w[self.i_cur] += gain
        if np.max(self.log_w) > (self.s.ks_base_exp + 10.0 * self.sigma) * _LN10:
            self.log_w[:] = 0.0
            self.sigma += 1
            self.x = self.data0.copy() if hasattr(self.data0, "copy") else self.data0
            self.stat = self.model._stat(self.x)
        return (self.i_cur, self.stat, self.log_w[self.i_cur],
                self._log_h(th[self.i_cur]))


def aex_aux_update(state: _AexAuxState, store: CumulativeStore, gen) -> None:
    """Advance the auxiliary chain one step and append its entry to the store."""
    store.append(*state.update(gen))


def run_aex(model, data, cfg: ChainConfig, particles: ParticleSet, proposal,
            rng: RngStream) -> ChainTrace:
    """Adaptive exchange: SAMC auxiliary chain plus resampled exchange target chain."""
    t0 = time.perf_counter()
    data = model.validate_state(data)
    s = cfg.aex or AexSettings()
    if particles.dim != model.param_dim:
        raise ConfigurationError("particle dimension does not match the model")
    gen = rng.split(_P_MAIN).generator()
    aux = _AexAuxState(model, particles, data, s, gen)
    n_store = max(0, (s.n_pre - s.pre_burn)) // max(1, s.pre_thin)
    store = CumulativeStore(model, n_store + cfg.iterations + 1)

    for j in range(1, s.n_pre + 1):
        entry = aux.update(gen)
        if j > s.pre_burn and (j - s.pre_burn) % s.pre_thin == 0:
            store.append(*entry)
    pre_visits = aux.visits.copy()

    expfam = model.is_expfam
    sx = model.suff_stat(data) if expfam else None
    stat_x = None if expfam else model.stored_stat(data)
    theta = _initial_theta(model, data)
    lhx = None if expfam else model.log_h_stat(stat_x, theta)
    rec = _Recorder(cfg, model.param_dim)
    for i in range(1, cfg.iterations + 1):
        aex_aux_update(aux, store, gen)
        theta_new = proposal.step(theta, gen.standard_normal(model.param_dim))
        accept = False
        if _in_support(model, theta_new):
            stat_y, _ = aex_resample(store, theta_new, gen)
            if expfam:
                la = np.dot(theta_new - theta, sx) + np.dot(theta - theta_new, stat_y)
            else:
                lhx_new = model.log_h_stat(stat_x, theta_new)
                la = (lhx_new - lhx
                      + model.log_h_stat(stat_y, theta) - model.log_h_stat(stat_y, theta_new))
            if np.log(gen.random()) < la:
                theta, accept = theta_new, True
                if not expfam:
                    lhx = lhx_new
        rec.record(i, theta, accept)
    meta = {
        "truncations": aux.sigma,
        "pre_visit_max_dev": float(np.max(np.abs(pre_visits / max(1, s.n_pre) - 1.0 / aux.d))),
        "store_size": len(store),
    }
    return rec.trace("aex", t0, meta=meta, extras={"pre_visits": pre_visits,
                                                   "log_w": aux.log_w.copy()})


# ---------------------------------------------------------------------------
# ALR adaptive importance-sampling chain
# ---------------------------------------------------------------------------


@dataclass
class LogZEstimates:
    """Per-particle log-normalizer estimates from stochastic approximation."""

    c: np.ndarray
    gamma: float
    iterations: int


class _GrowArray:
    """Append-only float rows with amortized growth."""

    def __init__(self, dim):
        self.buf = np.empty((64, dim))
        self.n = 0

    def append(self, row):
        if self.n == len(self.buf):
            self.buf = np.vstack([self.buf, np.empty_like(self.buf)])
        self.buf[self.n] = row
        self.n += 1

    def view(self) -> np.ndarray:
        return self.buf[: self.n]


def _alr_softmax(model, particles, stat, c):
    if model.is_expfam:
        logits = particles.theta @ stat - c
    else:
        logits = np.array(
            [model.log_h_stat(stat, t) for t in particles.theta]
        ) - c
    logits = logits - logits.max()
    p = np.exp(logits)
    return p / p.sum()


def alr_pretune(model, data, particles: ParticleSet, rng: RngStream,
                settings: AlrSettings | None = None, keep_final_epoch: bool = False):
    """Wang-Landau warm start: halve the gain whenever particle visits equalize.

    Returns (state, particle index, LogZEstimates) with mean-centered c.
    With keep_final_epoch, also returns the (index, statistic) path of the
    last epoch, whose equalized visits cover every particle; it seeds the
    main chain's history so kernel-weighted particles never lack samples.
    """
    s = settings or AlrSettings()
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    d = len(particles)
    x = data.copy() if hasattr(data, "copy") else data
    i_cur = int(gen.integers(d))
    c = np.zeros(d)
    gamma = s.gamma0
    total = 0
    trail = []
    from .errors import ConvergenceError

    while gamma > s.eps1:
        v = np.zeros(d)
        final_epoch = gamma / 2.0 <= s.eps1
        trail = [] if (keep_final_epoch and final_epoch) else trail
        while True:
            x = inner_run(model, x, particles.theta[i_cur], s.inner, gen)
            stat = model._stat(x)
            p = _alr_softmax(model, particles, stat, c)
            i_cur = int(np.searchsorted(np.cumsum(p), gen.random()))
            i_cur = min(i_cur, d - 1)
            c = c + gamma * p
            v[i_cur] += 1
            total += 1
            if keep_final_epoch and final_epoch:
                trail.append((i_cur, stat))
            vbar = v.mean()
            if np.max(np.abs(v - vbar)) <= s.eps2 * vbar:
                break
            if total > s.epoch_cap:
                raise ConvergenceError(
                    "pretune visit counts did not equalize",
                    last_iterate=c, diagnostics={"gamma": gamma, "visits": v},
                )
        gamma /= 2.0
    c = c - c.mean()
    est = LogZEstimates(c=c, gamma=gamma, iterations=total)
    if keep_final_epoch:
        return x, i_cur, est, trail
    return x, i_cur, est


def alr_log_zhat(history_stats, visits, c, particles: ParticleSet, theta,
                 bandwidth: int, model) -> float:
    """log of the kernel-weighted importance estimate of Z(theta).

    history_stats[i] holds the stored statistics of past samples at
    particle i; the kernel puts weight 1/h on the h nearest particles.
    """
    theta = as_theta(theta, particles.dim)
    idxs = particles.kernel_nearest(theta, bandwidth)
    h = len(idxs)
    terms = np.empty(h)
    for t, i in enumerate(idxs):
        if visits[i] == 0:
            raise DegenerateStoreError(f"particle {i} is kernel-weighted but has no visits")
        if model.is_expfam:
            vals = history_stats[i].view() @ (theta - particles.theta[i])
        else:
            vals = np.array(
                [model.log_h_stat(stat, theta) - model.log_h_stat(stat, particles.theta[i])
                 for stat in history_stats[i]]
            )
        terms[t] = -np.log(h) + c[i] + log_sum_exp(vals) - np.log(visits[i])
    return log_sum_exp(terms)


def run_alr(model, data, cfg: ChainConfig, particles: ParticleSet, proposal,
            rng: RngStream) -> ChainTrace:
    """Atchade-Lartillot-Robert chain with plug-in normalizer estimates."""
    t0 = time.perf_counter()
    data = model.validate_state(data)
    s = cfg.alr or AlrSettings()
    if particles.dim != model.param_dim:
        raise ConfigurationError("particle dimension does not match the model")
    x, i_cur, est, trail = alr_pretune(model, data, particles, rng.split(_P_INIT), s,
                                       keep_final_epoch=True)
    c = est.c.copy()
    d = len(particles)
    gen = rng.split(_P_MAIN).generator()

    expfam = model.is_expfam
    history = [_GrowArray(model.param_dim) if expfam else [] for _ in range(d)]
    visits = np.zeros(d, dtype=np.int64)

    def append(i, stat):
        visits[i] += 1
        history[i].append(stat)

    # the final pretune epoch seeds the history: its equalized visits cover
    # every particle, so kernel-weighted normalizer sums are well defined
    # from the first iteration
    for i, stat in trail:
        append(i, stat)
    append(i_cur, model._stat(x))
    n_updates = 0

    def one_update(x, i_cur, c, n_updates):
        x = inner_run(model, x, particles.theta[i_cur], s.inner, gen)
        stat = model._stat(x)
        p = _alr_softmax(model, particles, stat, c)
        i_cur = int(min(np.searchsorted(np.cumsum(p), gen.random()), d - 1))
        gamma = s.eps1 / (n_updates + 1) ** 0.7
        c = c + gamma * p
        append(i_cur, stat)
        return x, i_cur, c, n_updates + 1

    sx = model.suff_stat(data) if expfam else None
    stat_x = None if expfam else model.stored_stat(data)
    theta = _initial_theta(model, data)
    rec = _Recorder(cfg, model.param_dim)
    for i in range(1, cfg.iterations + 1):
        x, i_cur, c, n_updates = one_update(x, i_cur, c, n_updates)
        theta_new = proposal.step(theta, gen.standard_normal(model.param_dim))
        accept = False
        if _in_support(model, theta_new):
            lz_cur = alr_log_zhat(history, visits, c, particles, theta, s.bandwidth, model)
            lz_new = alr_log_zhat(history, visits, c, particles, theta_new, s.bandwidth, model)
            if expfam:
                la = np.dot(theta_new - theta, sx) + lz_cur - lz_new
            else:
                la = (model.log_h_stat(stat_x, theta_new) - model.log_h_stat(stat_x, theta)
                      + lz_cur - lz_new)
            if np.log(gen.random()) < la:
                theta, accept = theta_new, True
        rec.record(i, theta, accept)
    meta = {"pretune_iterations": est.iterations, "seed_history": len(trail),
            "final_gamma": est.gamma}
    return rec.trace("alr", t0, meta=meta, extras={"c": c.copy(), "visits": visits.copy()})


# ---------------------------------------------------------------------------
# Russian roulette pseudo-marginal chain
# ---------------------------------------------------------------------------


def roulette_sum(khat_fn, gen, tau_cap: int = 10_000):
    """Randomly truncated geometric-series sum.

    khat_fn(j) supplies the j-th series estimate; survival uses the running
    products q_j = prod(khat_1..j). Returns (S, tau). Unbiased for
    1 + sum_n prod(khat_1..n) when the khat are in (0, 1).
    """
    s_val = 1.0
    tau = 0
    cum_k = 1.0
    cum_q = 1.0
    q = 1.0
    u = 0.0
    while q > u:
        if tau >= 1:
            s_val += cum_k / cum_q
        tau += 1
        if tau > tau_cap:
            raise RouletteCapError(
                f"roulette truncation exceeded {tau_cap} terms (k-hat near 1)"
            )
        u = gen.random()
        k = khat_fn(tau)
        q = q * k
        cum_k *= k
        cum_q *= q
    return s_val, tau


def roulette_estimate(model, data, theta, rcfg: RouletteConfig, rng: RngStream,
                      theta0=None, iteration: int = 0):
    """Signed log unbiased likelihood estimate (sign, log|L|, tau).

    The raw normalizer estimate and the per-term estimates are importance
    ratios against theta0, so the estimate carries a constant Z(theta0)
    factor that cancels in MH ratios.
    """
    data = model.validate_state(data)
    theta = as_theta(theta, model.param_dim)
    if theta0 is None:
        theta0 = rcfg.theta0
    if theta0 is None:
        raise ConfigurationError("roulette estimate needs an importance parameter theta0")
    theta0 = as_theta(theta0, model.param_dim)
    inner = rcfg.inner or default_inner(model, "sampling")

    def log_zhat(j):
        stream = rng.split(_P_AUX, iteration, j)
        if model.is_expfam:
            stats = replicate_suff_stats(model, data, theta0, inner, stream, rcfg.n_replicates)
            return log_mean_exp(stats @ (theta - theta0))
        pair = replicate_pair_log_h(
            model, data, theta0, inner, stream, rcfg.n_replicates, theta, theta0
        )
        return log_mean_exp(pair[:, 0] - pair[:, 1])

    log_ztilde = log_zhat(0)

    def khat(j):
        return 1.0 - rcfg.c * np.exp(log_zhat(j) - log_ztilde)

    gen = rng.split(_P_EXTRA, iteration).generator()
    s_val, tau = roulette_sum(khat, gen, rcfg.tau_cap)
    lhx = model.log_h(data, theta)
    if s_val == 0.0:
        return 0, -np.inf, tau
    sign = 1 if s_val > 0 else -1
    log_abs = lhx + np.log(rcfg.c) + np.log(abs(s_val)) - log_ztilde
    return sign, float(log_abs), tau


def run_russian_roulette(model, data, cfg: ChainConfig, rcfg: RouletteConfig | None,
                         proposal, rng: RngStream) -> ChainTrace:
    """Pseudo-marginal chain on |L-hat| with signs retained for weighting."""
    t0 = time.perf_counter()
    data = model.validate_state(data)
    rcfg = rcfg or cfg.roulette or RouletteConfig()
    theta0 = rcfg.theta0
    if theta0 is None:
        if model.is_expfam:
            theta0 = mple(model, data)
        else:
            pilot_cfg = ChainConfig(iterations=1200, burn_in=200, thin=1, seed=cfg.seed,
                                    inner=rcfg.inner or cfg.inner)
            pilot = _ratio_chain(model, data, pilot_cfg, proposal, rng.split(_P_INIT),
                                 1, "dmh")
            theta0 = pilot.samples.mean(axis=0)
    theta0 = as_theta(theta0, model.param_dim)

    theta = model.prior.clip(theta0)
    sign_cur, ll_cur, _ = roulette_estimate(model, data, theta, rcfg, rng,
                                            theta0=theta0, iteration=0)
    zs, lus = _main_draws(cfg, rng, model.param_dim)
    rec = _Recorder(cfg, model.param_dim)
    signs = np.empty(cfg.n_retained, dtype=np.int8)
    taus = []
    for i in range(1, cfg.iterations + 1):
        theta_new = proposal.step(theta, zs[i - 1])
        accept = False
        if _in_support(model, theta_new):
            sign_new, ll_new, tau = roulette_estimate(model, data, theta_new, rcfg, rng,
                                                      theta0=theta0, iteration=i)
            taus.append(tau)
            if lus[i - 1] < ll_new - ll_cur:
                theta, sign_cur, ll_cur, accept = theta_new, sign_new, ll_new, True
        before = rec.row
        rec.record(i, theta, accept)
        if rec.row > before:
            signs[before] = sign_cur
    meta = {"theta0": theta0.tolist(), "mean_tau": float(np.mean(taus)) if taus else 0.0,
            "n_replicates": rcfg.n_replicates}
    return rec.trace("russian_roulette", t0, meta=meta, extras={"sign": signs})


def sign_weighted_mean(samples, signs) -> np.ndarray:
    """Ergodic average under the sign-corrected pseudo-marginal identity."""
    s = np.asarray(signs, dtype=np.float64)
    denom = s.sum()
    if denom == 0:
        raise ValueError("signs sum to zero; weighted average undefined")
    return (samples * s[:, None]).sum(axis=0) / denom
