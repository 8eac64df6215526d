"""Pruned layer-wise relevance propagation."""

from ._core import (
    ConfigError,
    Error,
    FormatError,
    Model,
    NumericalError,
    ShapeError,
    accuracy,
    entropy,
    explain,
    gen_genome,
    gen_shapes,
    gini,
    make_preset,
    prune_lambda,
    relevance_mass_accuracy,
    sparsity_gains,
    threshold_for_gain,
    threshold_for_mass,
    train,
)

__all__ = [
    "ConfigError",
    "Error",
    "FormatError",
    "Model",
    "NumericalError",
    "ShapeError",
    "accuracy",
    "entropy",
    "explain",
    "gen_genome",
    "gen_shapes",
    "gini",
    "make_preset",
    "prune_lambda",
    "relevance_mass_accuracy",
    "sparsity_gains",
    "threshold_for_gain",
    "threshold_for_mass",
    "train",
]
