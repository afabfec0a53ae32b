"""State-space samplers: Gibbs sweeps, m-step inner kernels, perfect
sampling for the lattice model, and birth-death moves for point patterns.

All samplers take an RngStream (or a positioned Generator) and are pure in
their inputs: states are copied, never mutated.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CoalescenceError
from .models import IsingModel, ErgmModel, PointProcessModel, PointPattern, as_theta
from .rng import RngStream

CFTP_SWEEP_CAP = 2**26

KIND_GIBBS = "gibbs"
KIND_TIE_NO_TIE = "tie_no_tie"
KIND_BIRTH_DEATH = "birth_death"


@dataclass(frozen=True)
class InnerKernelConfig:
    """Inner-sampler length and flavor.

    cycles counts full scans: every lattice site, every dyad, or (for
    birth-death) as many steps as there are points at the start of the run.
    """

    cycles: int = 1
    kind: str = KIND_GIBBS

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError("inner kernel needs at least one cycle")
        if self.kind not in (KIND_GIBBS, KIND_TIE_NO_TIE, KIND_BIRTH_DEATH):
            raise ValueError(f"unknown inner kernel kind {self.kind!r}")


def default_inner(model, purpose: str = "sampling") -> InnerKernelConfig:
    """5 cycles for sampling runs, 1 cycle for adaptive-update runs."""
    cycles = 5 if purpose == "sampling" else 1
    kind = KIND_BIRTH_DEATH if isinstance(model, PointProcessModel) else KIND_GIBBS
    return InnerKernelConfig(cycles=cycles, kind=kind)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("expected an RngStream or numpy Generator")


def _check_kind(model, kind):
    ok = {
        "ising": (KIND_GIBBS,),
        "ergm": (KIND_GIBBS, KIND_TIE_NO_TIE),
        "pointprocess": (KIND_BIRTH_DEATH,),
    }[model.kind]
    if kind not in ok:
        raise ValueError(f"inner kernel {kind!r} not admissible for {model.kind} models")


def gibbs_sweep(model, state, theta, rng):
    """One systematic full-conditional scan (row-major sites, or dyads)."""
    return inner_run(model, state, theta, InnerKernelConfig(cycles=1, kind=KIND_GIBBS), rng)


def inner_run(model, start, theta, cfg: InnerKernelConfig, rng):
    """Apply m cycles of the configured kernel; stationary law h(.|theta)/Z."""
    _check_kind(model, cfg.kind)
    gen = _as_generator(rng)
    theta = as_theta(theta, model.param_dim)
    if isinstance(model, IsingModel):
        spins = model.coerce(start).copy()
        u = gen.random((cfg.cycles, model.n_sites))
        _kernels.ising_sweeps(spins, float(theta[0]), u)
        return spins
    if isinstance(model, ErgmModel):
        adj = model.coerce(start).copy()
        if cfg.kind == KIND_GIBBS:
            u = gen.random((cfg.cycles, model.n_dyads))
            _kernels.ergm_gibbs_cycles(adj, theta, u)
        else:
            u = gen.random((cfg.cycles, model.n_dyads, 3))
            _kernels.ergm_tnt_cycles(adj, theta, u)
        return adj
    return _pp_run(model, start, theta, cfg.cycles, gen)


def _pp_run(model: PointProcessModel, start, theta, cycles, gen) -> PointPattern:
    pattern = model.coerce(start)
    steps = cycles * max(pattern.n, 1)
    return _pp_steps(model, pattern, theta, steps, gen)


def _pp_steps(model: PointProcessModel, pattern: PointPattern, theta, steps, gen) -> PointPattern:
    ft = model.full_theta(theta)
    p = model.params
    cap_pts = pattern.n + steps + 8
    x = np.empty(cap_pts, dtype=np.float64)
    y = np.empty(cap_pts, dtype=np.float64)
    x[: pattern.n] = pattern.points[:, 0]
    y[: pattern.n] = pattern.points[:, 1]
    s = np.empty(cap_pts, dtype=np.float64)
    s[: pattern.n] = _kernels.pp_point_sums(x, y, pattern.n, ft[1], ft[2], ft[3], p.R, p.D1, p.D2)
    u = gen.random((steps, 4))
    n = _kernels.pp_birth_death_run(
        x, y, s, pattern.n, ft[0], ft[1], ft[2], ft[3], p.R, p.D1, p.D2, p.log_cap,
        model.center[0], model.center[1], model.radius, u,
    )
    return PointPattern(np.column_stack([x[:n], y[:n]]), model.center, model.radius)


def birth_death_step(model: PointProcessModel, state, theta, rng) -> PointPattern:
    """One birth-or-death MH move; a death proposal on an empty pattern is a no-op."""
    return _pp_steps(model, model.validate_state(state), theta, 1, _as_generator(rng))


def tempered_transition(model, state, theta, theta_prime, beta_k, rng):
    """One MH cycle targeting h(y|theta')^(1-b) h(y|theta)^b.

    For exponential families this is the model at the blended parameter
    (1-b) theta' + b theta, so one Gibbs cycle there is exact.
    """
    if not model.is_expfam:
        raise ValueError("tempered transitions require an exponential-family model")
    if not (0.0 <= beta_k <= 1.0):
        raise ValueError("blend weight must lie in [0, 1]")
    theta = as_theta(theta, model.param_dim)
    theta_prime = as_theta(theta_prime, model.param_dim)
    blended = (1.0 - beta_k) * theta_prime + beta_k * theta
    return inner_run(model, state, blended, InnerKernelConfig(cycles=1, kind=KIND_GIBBS), rng)


# ---------------------------------------------------------------------------
# Perfect sampling (monotone CFTP) for the ferromagnetic lattice
# ---------------------------------------------------------------------------


def cftp_perfect_sample(model: IsingModel, theta, rng: RngStream, min_epochs: int = 0):
    """Exact draw from h(.|theta)/Z via coupling from the past.

    Bounding all-up/all-down chains are run from epochs -1, -2, -4, ...
    with reused randomness (per-epoch substreams of `rng`) until they
    coalesce by time zero. Requires theta >= 0 (the monotone regime).
    `min_epochs` forces a deeper starting epoch; the result is unchanged.
    """
    if not isinstance(model, IsingModel):
        raise ValueError("perfect sampling is implemented for the lattice model only")
    theta = as_theta(theta, 1)
    if theta[0] < 0:
        raise ValueError("monotone coupling requires theta >= 0")
    sites = model.n_sites
    blocks = []  # blocks[e]: uniforms for times 2^(e-1)+1 .. 2^e before zero

    def ensure_epoch(e):
        while len(blocks) <= e:
            k = len(blocks)
            n_times = 1 if k == 0 else 2 ** (k - 1)
            blocks.append(rng.split(k).generator().random((n_times, sites)))

    epoch = min_epochs
    while True:
        horizon = 2**epoch
        if horizon > CFTP_SWEEP_CAP:
            raise CoalescenceError(
                f"no coalescence within 2^{int(np.log2(CFTP_SWEEP_CAP))} sweeps at theta={theta[0]}"
            )
        ensure_epoch(epoch)
        top = model.constant_state(1)
        bottom = model.constant_state(-1)
        equal = False
        for e in range(epoch, -1, -1):
            equal = _kernels.ising_coupled_block(top, bottom, float(theta[0]), blocks[e])
        if equal:
            return top
        epoch += 1


# ---------------------------------------------------------------------------
# Replicate batches (the deterministic parallel-map contract)
# ---------------------------------------------------------------------------
#
# Each replicate r consumes a fixed slice u[r] of a block drawn from one
# derived stream, and results are reduced in index order, so outputs are
# bitwise identical no matter how the replicates are scheduled.


def replicate_suff_stats(model, start, theta, cfg: InnerKernelConfig, rng, n_reps) -> np.ndarray:
    """n_reps independent inner runs from `start`; final sufficient statistics."""
    _check_kind(model, cfg.kind)
    gen = _as_generator(rng)
    theta = as_theta(theta, model.param_dim)
    if isinstance(model, IsingModel):
        spins = model.coerce(start)
        u = gen.random((n_reps, cfg.cycles, model.n_sites))
        return _kernels.ising_replicate_stats(spins, float(theta[0]), u).astype(np.float64)[:, None]
    if isinstance(model, ErgmModel):
        adj = model.coerce(start)
        tnt = cfg.kind == KIND_TIE_NO_TIE
        width = model.n_dyads * (3 if tnt else 1)
        u = gen.random((n_reps, cfg.cycles, width))
        return _kernels.ergm_replicate_stats(adj, theta, u, tnt)
    raise ValueError("suff-stat replicates need an exponential-family model")


def replicate_pair_log_h(model, start, theta_sim, cfg, rng, n_reps, theta_a, theta_b) -> np.ndarray:
    """n_reps inner runs at theta_sim; log h of each final state at two points.

    Works for any model; the point-process case runs inside one compiled
    batch, exponential families reduce to suff-stat dot products.
    """
    if model.is_expfam:
        stats = replicate_suff_stats(model, start, theta_sim, cfg, rng, n_reps)
        a = stats @ as_theta(theta_a, model.param_dim)
        b = stats @ as_theta(theta_b, model.param_dim)
        return np.column_stack([a, b])
    gen = _as_generator(rng)
    pattern = model.coerce(start)
    ft = model.full_theta(theta_sim)
    p = model.params
    steps = cfg.cycles * max(pattern.n, 1)
    u = gen.random((n_reps, steps, 4))
    return _kernels.pp_pair_log_h(
        np.ascontiguousarray(pattern.points[:, 0]),
        np.ascontiguousarray(pattern.points[:, 1]),
        pattern.n, u, ft[0], ft[1], ft[2], ft[3], p.R, p.D1, p.D2, p.log_cap,
        model.center[0], model.center[1], model.radius,
        model.full_theta(theta_a), model.full_theta(theta_b),
    )
