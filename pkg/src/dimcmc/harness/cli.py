"""Command-line harness.

Subcommands: run, oracle, scaling, summarize, list. Settings come from an
optional JSON config document; explicit flags override file fields. Exit
codes: 0 success, 2 configuration error, 3 integrity error.
"""

import argparse
import json
import sys

import numpy as np

from ..diagnostics import ChainSummary, batch_means_mcse, ess, hpd_interval
from ..errors import ConfigurationError, IntegrityError
from .experiments import (
    ALGORITHMS,
    ExperimentConfig,
    _REGISTRY,
    _SCALING,
    experiment_ids,
    run_experiment,
    run_oracle,
    run_scaling,
)
from .report import render_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRITY = 3


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--experiment", help="registry experiment id")
    p.add_argument("--algorithm", help="algorithm id")
    p.add_argument("--iterations", type=int)
    p.add_argument("--burnin", type=int, dest="burn_in")
    p.add_argument("--thin", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="artifact output directory")
    p.add_argument("--workers", type=int)


def _config_from_args(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        with open(args.config) as f:
            doc = json.load(f)
    for key in ("experiment", "algorithm", "iterations", "burn_in", "thin",
                "seed", "out", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = val
    if "experiment" not in doc:
        raise ConfigurationError("an experiment id is required (flag --experiment or config file)")
    doc.setdefault("algorithm", "dmh")
    doc.setdefault("seed", 1)
    doc.setdefault("workers", 1)
    return ExperimentConfig(**doc)


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    record = run_experiment(config)
    print(json.dumps(record.summary, indent=2))
    if config.out:
        print(f"artifacts written to {config.out}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    config = _config_from_args(args)
    result = run_oracle(config)
    print(json.dumps(result, indent=2))
    return EXIT_OK


def _cmd_scaling(args) -> int:
    config = _config_from_args(args)
    result = run_scaling(config)
    print(json.dumps(result, indent=2))
    return EXIT_OK


def _cmd_summarize(args) -> int:
    rows = np.genfromtxt(args.trace, delimiter=",", names=True)
    names = [n for n in rows.dtype.names if n.startswith("theta_")]
    samples = np.column_stack([rows[n] for n in names])
    acc = float(rows["accepted"].mean())
    means, sds, hpds, esss, mcses = [], [], [], [], []
    for k in range(samples.shape[1]):
        x = samples[:, k]
        means.append(float(x.mean()))
        sds.append(float(x.std(ddof=1)))
        hpds.append(hpd_interval(x))
        esss.append(ess(x))
        mcses.append(batch_means_mcse(x))
    summary = ChainSummary(
        mean=means, sd=sds, hpd=hpds, ess=esss, mcse=mcses, acceptance=acc,
        wall_time=float("nan"), ess_per_sec=[float("nan")] * len(means),
        algorithm=args.trace, n_samples=samples.shape[0],
    )
    print(summary.to_json())
    return EXIT_OK


def _cmd_list(args) -> int:
    print("experiments:")
    for eid in experiment_ids():
        if eid in _SCALING:
            print(f"  {eid:14s} scaling study (use the 'scaling' command)")
            continue
        exp = _REGISTRY[eid]
        allowed = [a for a in ALGORITHMS if a not in exp.denied]
        print(f"  {eid:14s} {exp.description}")
        print(f"  {'':14s} algorithms: {', '.join(allowed)}")
        for alg, why in exp.denied.items():
            print(f"  {'':14s} {alg}: unavailable ({why})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimcmc",
        description="Benchmark harness for doubly-intractable posterior samplers",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", _cmd_run), ("oracle", _cmd_oracle), ("scaling", _cmd_scaling)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
    p = sub.add_parser("summarize")
    p.add_argument("trace", help="trace CSV to summarize")
    p.set_defaults(fn=_cmd_summarize)
    p = sub.add_parser("list")
    p.set_defaults(fn=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except IntegrityError as e:
        print(f"integrity error: {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
