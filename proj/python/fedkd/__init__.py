"""Desk-scale simulator of knowledge-distillation federated learning."""

import json as _json

from ._core import (
    ConfigError,
    FedkdError,
    Model,
    default_config,
    loss_l1_logits,
    loss_local_combined,
    loss_lwof,
    loss_task_ce,
    partition_counts,
    run_experiment_json,
    serialize_config,
    softmax_temperature,
)
from ._core import __version__

__all__ = [
    "ConfigError",
    "FedkdError",
    "Model",
    "__version__",
    "default_config",
    "loss_l1_logits",
    "loss_local_combined",
    "loss_lwof",
    "loss_task_ce",
    "partition_counts",
    "run_experiment",
    "run_experiment_json",
    "serialize_config",
    "softmax_temperature",
]


def run_experiment(**overrides):
    """Run an experiment; keyword overrides map onto config fields.

    Returns the summary as nested dicts/lists: initial accuracies, final
    global/distilled/personalised means, the gap, and one record per round.
    """
    kv = {key: str(value) for key, value in overrides.items()}
    return _json.loads(run_experiment_json(kv))
