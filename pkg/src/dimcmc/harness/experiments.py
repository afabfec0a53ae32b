"""Experiment registry and orchestration.

Each registry entry fixes a model, a dataset, per-algorithm chain settings,
and a proposal; ExperimentConfig overrides iteration counts and seeds.
Every (experiment, algorithm) pair either runs or raises a configuration
error naming the violated requirement.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import __version__
from ..algorithms import (
    AexSettings,
    AlrSettings,
    ChainConfig,
    ProposalSpec,
    RouletteConfig,
    run_aex,
    run_alr,
    run_avm,
    run_dmh,
    run_exchange,
    run_exchange_bridging,
    run_noisy_dmh,
    run_russian_roulette,
)
from ..diagnostics import summarize
from ..errors import ConfigurationError
from ..models import (
    IsingModel,
    PointPattern,
    UniformBox,
    exact_log_z,
    grid_posterior,
    stat_table,
)
from ..particles import ParticleSet, fractional_dmh, maxmin_select
from ..rng import RngStream
from ..samplers import InnerKernelConfig, _pp_steps, cftp_perfect_sample
from . import datasets
from .report import (
    oracle_figure,
    posterior_figure,
    scaling_figure,
    write_manifest,
    write_summary_json,
    write_trace_csv,
)

ALGORITHMS = (
    "avm", "exchange", "exchange_bridging", "dmh", "noisy_dmh",
    "aex", "alr", "russian_roulette",
)

_RUNNERS = {
    "avm": run_avm,
    "exchange": run_exchange,
    "exchange_bridging": run_exchange_bridging,
    "dmh": run_dmh,
    "noisy_dmh": run_noisy_dmh,
}

_NEEDS_PARTICLES = {"aex", "alr"}

FLORENTINE_COV = np.array(
    [
        [1.5725, -0.8400, 0.4447, 0.2532],
        [-0.8400, 0.4986, -0.2888, -0.1576],
        [0.4447, -0.2888, 0.1991, 0.0311],
        [0.2532, -0.1576, 0.0311, 0.3821],
    ]
)

NO_PERFECT_SAMPLER = "requires perfect sampling, which is available only for the lattice model"
NO_SUFF_STATS = (
    "requires low-dimensional sufficient statistics; storing point-pattern "
    "histories is outside the desk-scale budget"
)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    algorithm: str = "dmh"
    iterations: int | None = None
    burn_in: int | None = None
    thin: int | None = None
    seed: int = 1
    out: str | None = None
    workers: int = 1

    @classmethod
    def from_file(cls, path, **overrides):
        with open(path) as f:
            doc = json.load(f)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


@dataclass
class RunRecord:
    config: dict
    summary: dict
    trace_path: str
    version: str
    started: float
    elapsed: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class _Experiment:
    description: str
    iterations: int
    burn_in: int
    denied: dict = field(default_factory=dict)
    bridge_levels: int = 5

    def model(self):
        raise NotImplementedError

    def data(self, model):
        raise NotImplementedError

    def proposal(self, model) -> ProposalSpec:
        raise NotImplementedError

    def inner(self, model) -> InnerKernelConfig:
        return InnerKernelConfig(cycles=10)

    def particles(self, model, data, proposal, algorithm) -> ParticleSet:
        raise ConfigurationError(f"experiment has no particle recipe for {algorithm}")

    def aex_settings(self) -> AexSettings:
        return AexSettings()

    def alr_settings(self) -> AlrSettings:
        return AlrSettings()

    def roulette(self, model, data) -> RouletteConfig:
        return RouletteConfig(n_replicates=200)


class _IsingExperiment(_Experiment):
    def __init__(self, dataset, shape, scale, **kw):
        super().__init__(**kw)
        self.dataset = dataset
        self.shape = shape
        self.scale = scale

    def model(self):
        return IsingModel(*self.shape)

    def data(self, model):
        return datasets.load_dataset(self.dataset)

    def proposal(self, model):
        return ProposalSpec(np.array([self.scale]))

    def particles(self, model, data, proposal, algorithm):
        d = 100 if model.n_sites >= 100 else 25
        if algorithm == "alr":
            # particles drawn from the uniform prior suffice in one dimension
            gen = RngStream(9100, 1).generator()
            draws = gen.uniform(model.prior.lo[0], model.prior.hi[0], d)
            return ParticleSet.from_points(np.sort(draws)[:, None])
        cfg = ChainConfig(iterations=2, burn_in=1, thin=1, inner=self.inner(model))
        cand = fractional_dmh(model, data, 0.5, 5000, cfg, proposal, RngStream(9101))
        return maxmin_select(cand, d, RngStream(9102))

    def aex_settings(self):
        if self.shape[0] * self.shape[1] >= 100:
            return AexSettings(n_pre=420_000, pre_burn=20_000, pre_thin=20, n0=20_000)
        return AexSettings(n_pre=50_000, pre_burn=2_000, pre_thin=10, n0=2_000)

    def alr_settings(self):
        return AlrSettings(bandwidth=10 if self.shape[0] * self.shape[1] >= 100 else 5)

    def roulette(self, model, data):
        return RouletteConfig(n_replicates=200, inner=InnerKernelConfig(cycles=10))


class _FlorentineExperiment(_Experiment):
    def model(self):
        from ..models import ErgmModel

        return ErgmModel(16)

    def data(self, model):
        return datasets.load_dataset("florentine")

    def proposal(self, model):
        return ProposalSpec(np.sqrt(np.diag(FLORENTINE_COV)), cov=(2.38**2 / 4) * FLORENTINE_COV)

    def _candidates(self, model, data, proposal):
        cfg = ChainConfig(iterations=2, burn_in=1, thin=1, inner=self.inner(model))
        cand = fractional_dmh(model, data, 0.95, 5000, cfg, proposal, RngStream(9201))
        # trim the stray excursions toward the degenerate region
        lo = np.quantile(cand, 0.01, axis=0)
        hi = np.quantile(cand, 0.99, axis=0)
        return cand[np.all((cand >= lo) & (cand <= hi), axis=1)]

    def particles(self, model, data, proposal, algorithm):
        cand = self._candidates(model, data, proposal)
        d = 200 if algorithm == "aex" else 100
        return maxmin_select(cand, d, RngStream(9202))

    def aex_settings(self):
        return AexSettings(n_pre=630_000, pre_burn=30_000, pre_thin=20, n0=20_000)

    def alr_settings(self):
        return AlrSettings(bandwidth=20)

    def roulette(self, model, data):
        return RouletteConfig(n_replicates=500, inner=InnerKernelConfig(cycles=10))


class _RsvBExperiment(_Experiment):
    def model(self):
        return datasets.rsv_b_model()

    def data(self, model):
        return datasets.load_dataset("rsv-b")

    def proposal(self, model):
        return ProposalSpec(np.array([3e-5, 0.05, 0.6]))

    def inner(self, model):
        return InnerKernelConfig(cycles=10, kind="birth_death")

    def roulette(self, model, data):
        return RouletteConfig(n_replicates=200, inner=self.inner(model))


_REGISTRY = {
    "ising-0.2": _IsingExperiment(
        dataset="ising-0.2", shape=(10, 10), scale=0.13,
        description="Ising 10x10 lattice simulated at theta = 0.2 (moderate dependence)",
        iterations=21_000, burn_in=1_000,
    ),
    "ising-0.43": _IsingExperiment(
        dataset="ising-0.43", shape=(10, 10), scale=0.13,
        description="Ising 10x10 lattice simulated at theta = 0.43 (strong dependence)",
        iterations=21_000, burn_in=1_000,
    ),
    "oracle-4x4": _IsingExperiment(
        dataset="oracle-4x4", shape=(4, 4), scale=0.35,
        description="Ising 4x4 testbed with an exact grid-posterior oracle",
        iterations=52_000, burn_in=2_000,
    ),
    "florentine": _FlorentineExperiment(
        description="Florentine business network, 4-parameter undirected ERGM",
        iterations=32_000, burn_in=2_000,
        denied={
            "avm": NO_PERFECT_SAMPLER,
            "exchange": NO_PERFECT_SAMPLER,
            "exchange_bridging": NO_PERFECT_SAMPLER,
        },
    ),
    "rsv-b": _RsvBExperiment(
        description="Synthetic attraction-repulsion point pattern (RSV-B settings)",
        iterations=42_000, burn_in=2_000,
        denied={
            "avm": NO_PERFECT_SAMPLER,
            "exchange": NO_PERFECT_SAMPLER,
            "exchange_bridging": NO_PERFECT_SAMPLER,
            "aex": NO_SUFF_STATS,
            "alr": NO_SUFF_STATS,
        },
    ),
}

_SCALING = ("scaling-ising", "scaling-pp")


def experiment_ids():
    return list(_REGISTRY) + list(_SCALING)


def _set_workers(workers: int):
    import numba

    if workers < 1:
        raise ConfigurationError("worker count must be >= 1")
    numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))


def _resolve(config: ExperimentConfig):
    if config.experiment in _SCALING:
        raise ConfigurationError(
            f"{config.experiment} is a scaling study; use the 'scaling' command"
        )
    if config.experiment not in _REGISTRY:
        raise ConfigurationError(f"unknown experiment {config.experiment!r}")
    exp = _REGISTRY[config.experiment]
    if config.algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {config.algorithm!r}")
    if config.algorithm in exp.denied:
        raise ConfigurationError(
            f"{config.algorithm} on {config.experiment}: {exp.denied[config.algorithm]}"
        )
    return exp


def run_chain(config: ExperimentConfig):
    """Execute the configured chain; returns (trace, model, data)."""
    exp = _resolve(config)
    _set_workers(config.workers)
    model = exp.model()
    data = exp.data(model)
    proposal = exp.proposal(model)
    cfg = ChainConfig(
        iterations=config.iterations or exp.iterations,
        burn_in=exp.burn_in if config.burn_in is None else config.burn_in,
        thin=config.thin or 1,
        seed=config.seed,
        inner=exp.inner(model),
        n_replicates=100,
        bridge_levels=exp.bridge_levels,
        aex=exp.aex_settings(),
        alr=exp.alr_settings(),
    )
    rng = RngStream(config.seed)
    alg = config.algorithm
    if alg in _RUNNERS:
        trace = _RUNNERS[alg](model, data, cfg, proposal, rng)
    elif alg in _NEEDS_PARTICLES:
        parts = exp.particles(model, data, proposal, alg)
        runner = run_aex if alg == "aex" else run_alr
        trace = runner(model, data, cfg, parts, proposal, rng)
    else:
        trace = run_russian_roulette(model, data, cfg, exp.roulette(model, data), proposal, rng)
    return trace, model, data


def run_experiment(config: ExperimentConfig) -> RunRecord:
    """Run one (experiment, algorithm) cell and write its artifacts."""
    started = time.time()
    trace, model, _ = run_chain(config)
    summary = summarize(trace)
    record = RunRecord(
        config=asdict(config), summary=summary.to_dict(), trace_path="",
        version=__version__, started=started, elapsed=trace.wall_time,
    )
    if config.out:
        import pathlib

        out = pathlib.Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{config.experiment}_{config.algorithm}"
        record.trace_path = str(out / f"{stem}_trace.csv")
        write_trace_csv(trace, record.trace_path)
        write_summary_json(summary, out / f"{stem}_summary.json")
        posterior_figure(trace, model, out / f"{stem}_posterior.png")
        (out / f"{stem}_record.json").write_text(record.to_json())
        write_manifest(out)
    return record


def oracle_grid(model, data, n_grid: int = 2001):
    s = model.suff_stat(data)
    grid = np.linspace(model.prior.lo[0], model.prior.hi[0], n_grid)
    return (grid, *grid_posterior(model, s, grid))


def run_oracle(config: ExperimentConfig) -> dict:
    """Exact grid posterior for an enumerable experiment; writes a table and figure."""
    exp = _resolve(ExperimentConfig(experiment=config.experiment, algorithm="dmh",
                                    seed=config.seed))
    model = exp.model()
    if not model.is_expfam or model.param_dim != 1:
        raise ConfigurationError("oracle runs need an enumerable one-parameter model")
    stat_table(model)  # refuses oversize state spaces
    data = exp.data(model)
    grid, w, mean, sd, hpd = oracle_grid(model, data)
    result = {
        "experiment": config.experiment,
        "n_grid": len(grid),
        "mean": mean,
        "sd": sd,
        "hpd": list(hpd),
        "data_stat": model.suff_stat(data).tolist(),
    }
    if config.out:
        import pathlib

        out = pathlib.Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{config.experiment}_oracle.csv"
        with open(path, "w") as f:
            f.write("theta,posterior\n")
            for g, wi in zip(grid, w):
                f.write(f"{g!r},{wi!r}\n")
        (out / f"{config.experiment}_oracle.json").write_text(json.dumps(result, indent=2))
        oracle_figure(grid, w, out / f"{config.experiment}_oracle.png")
        write_manifest(out)
    return result


def _loglog_slope(sizes, times):
    if len(sizes) < 2:
        return None
    return float(np.polyfit(np.log(np.asarray(sizes, float)),
                            np.log(np.asarray(times, float)), 1)[0])


def run_scaling(config: ExperimentConfig) -> dict:
    """Wall time per iteration across data sizes, with log-log slope fits."""
    if config.experiment not in _SCALING:
        raise ConfigurationError("scaling runs support scaling-ising and scaling-pp only")
    _set_workers(config.workers)
    seed = config.seed
    rows = []
    if config.experiment == "scaling-ising":
        sizes = [(10, 10), (20, 20), (40, 40)]
        iters = config.iterations or 1000
        for k, shape in enumerate(sizes):
            model = IsingModel(*shape)
            data = cftp_perfect_sample(model, [0.2], RngStream(7000 + k))
            cfg = ChainConfig(iterations=iters, burn_in=0, thin=1, seed=seed,
                              inner=InnerKernelConfig(cycles=50))
            trace = run_dmh(model, data, cfg, ProposalSpec(np.array([0.13])), RngStream(seed, k))
            rows.append({"size": model.n_sites, "seconds_per_iter": trace.wall_time / iters})
    else:
        targets = [50, 100, 200, 400]
        for k, n in enumerate(targets):
            radius = datasets.RSV_B_RADIUS * np.sqrt(n / 200.0)
            base = datasets.rsv_b_model()
            model = type(base)(center=(0.0, 0.0), radius=float(radius),
                               params=base.params, theta3=base.theta3, prior=base.prior)
            empty = PointPattern(np.empty((0, 2)), model.center, model.radius)
            pat = _pp_steps(model, empty, datasets.RSV_B_TRUE[:3], 100_000,
                            RngStream(7100 + k).generator())
            iters = config.iterations or max(100, 2000 // (1 + k))
            cfg = ChainConfig(iterations=iters, burn_in=0, thin=1, seed=seed,
                              inner=InnerKernelConfig(cycles=10, kind="birth_death"))
            trace = run_dmh(model, pat, cfg, ProposalSpec(np.array([3e-5, 0.05, 0.6])),
                            RngStream(seed, k))
            rows.append({"size": pat.n, "seconds_per_iter": trace.wall_time / iters})
    slope = _loglog_slope([r["size"] for r in rows], [r["seconds_per_iter"] for r in rows])
    result = {"experiment": config.experiment, "rows": rows, "dmh_slope": slope}
    if config.out:
        import pathlib

        out = pathlib.Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{config.experiment}_timing.csv"
        with open(path, "w") as f:
            f.write("size,seconds_per_iter\n")
            for r in rows:
                f.write(f"{r['size']},{r['seconds_per_iter']!r}\n")
        (out / f"{config.experiment}_timing.json").write_text(json.dumps(result, indent=2))
        scaling_figure(rows, slope, out / f"{config.experiment}_scaling.png")
        write_manifest(out)
    return result
