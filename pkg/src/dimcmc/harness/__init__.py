"""Experiment registry, datasets, orchestration, and report rendering."""

from .datasets import load_dataset
from .experiments import (
    ExperimentConfig,
    RunRecord,
    experiment_ids,
    run_experiment,
    run_oracle,
    run_scaling,
)

__all__ = [
    "load_dataset", "ExperimentConfig", "RunRecord", "experiment_ids",
    "run_experiment", "run_oracle", "run_scaling",
]
