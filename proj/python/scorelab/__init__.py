"""Inception Score diagnostics, decomposition, and stress tests."""

from ._scorelab import (
    AttackFailure,
    Classifier,
    InvalidInput,
    LoadError,
    TrainingFailure,
    attack,
    bayes_posterior,
    entropy,
    entropy_decomposition,
    entropy_study,
    gaussian_demo,
    improved_score,
    inception_score,
    kl_divergence,
    load_matrix,
    marginal,
    run_cli,
    save_matrix,
    split_study,
    top_classes,
    train_blob_classifier,
)

__version__ = "0.1.0"
