"""Moment oracles: exact synthetic, topic-model snapshots, Gaussian samples."""

from .gaussian import (
    GaussianModel,
    GaussianOracle,
    gaussian_moments_1d,
    gaussian_projected_moments,
    hermite_coefficients,
    sample_gaussian_mixture,
)
from .synthetic import SyntheticOracle, synthetic_moments
from .topic import TopicCorpus, TopicOracle, sample_corpus, topic_projected_moments

__all__ = [
    "GaussianModel",
    "GaussianOracle",
    "SyntheticOracle",
    "TopicCorpus",
    "TopicOracle",
    "gaussian_moments_1d",
    "gaussian_projected_moments",
    "hermite_coefficients",
    "sample_corpus",
    "sample_gaussian_mixture",
    "synthetic_moments",
    "topic_projected_moments",
]
