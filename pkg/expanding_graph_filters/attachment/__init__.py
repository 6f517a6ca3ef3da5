"""Stochastic attachment models, rules and ensembles."""

from .ensemble import EnsembleAttachment, append_ensemble_row, compose_ensemble, initial_ensemble
from .models import StochasticAttachment, attachment_moments, sample_attachment
from .rules import (
    AttachmentRule,
    RuleScorer,
    centrality_scores,
    eigenvector_scores,
    pagerank_scores,
    rule_probabilities,
    target_dependencies,
)
from .simplex import on_simplex, project_simplex

__all__ = [
    "AttachmentRule",
    "EnsembleAttachment",
    "RuleScorer",
    "StochasticAttachment",
    "append_ensemble_row",
    "attachment_moments",
    "centrality_scores",
    "compose_ensemble",
    "eigenvector_scores",
    "initial_ensemble",
    "on_simplex",
    "pagerank_scores",
    "project_simplex",
    "rule_probabilities",
    "sample_attachment",
    "target_dependencies",
]
