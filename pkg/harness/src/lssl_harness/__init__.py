"""Toy-scale sequence-classification harness for exported SSM
initialization banks."""

from .container import ContainerError, load_bank, read_container, select_timescales
from .model import ConfigError, LsslBlock, LsslClassifier, build_model
from .task import ToyTask, add_noise, make_task
from .train import (
    HarnessConfig,
    TrainingDiverged,
    evaluate,
    run_experiment,
    train_model,
    write_results,
)

__version__ = "0.1.0"
