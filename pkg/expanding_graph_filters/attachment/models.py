"""Weighted-Bernoulli attachment model of an incoming node."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from expanding_graph_filters.graph import AttachmentVector
from expanding_graph_filters.models.errors import DimensionError, InvariantViolation

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


@dataclass(frozen=True, eq=False)
class StochasticAttachment:
    """Independent edges: node ``i`` links with probability ``probs[i]`` and weight ``weights[i]``."""

    probs: np.ndarray
    weights: np.ndarray
    weight_cap: float | None = None
    fallback: bool = False
    clipped: bool = False

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).ravel()
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if probs.shape != weights.shape:
            raise DimensionError(f"{probs.size} probabilities vs {weights.size} weights")
        if not np.all((probs >= 0.0) & (probs <= 1.0)):
            raise InvariantViolation("Attachment probabilities must lie in [0, 1]")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise InvariantViolation("Attachment weights must be finite and strictly positive")
        if self.weight_cap is not None and weights.size and weights.max() > self.weight_cap:
            raise InvariantViolation(
                f"Attachment weight {weights.max():.6g} exceeds the cap {self.weight_cap:.6g}"
            )
        probs.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return int(self.probs.size)

    @property
    def mean(self) -> np.ndarray:
        return self.probs * self.weights

    @property
    def cov_diag(self) -> np.ndarray:
        return self.weights**2 * self.probs * (1.0 - self.probs)

    def flagged(self, fallback: bool | None = None, clipped: bool | None = None) -> StochasticAttachment:
        return dataclasses.replace(
            self,
            fallback=self.fallback if fallback is None else fallback,
            clipped=self.clipped if clipped is None else clipped,
        )


def attachment_moments(sa: StochasticAttachment) -> tuple[np.ndarray, np.ndarray]:
    """Mean ``p * w`` and diagonal covariance ``w^2 p (1 - p)`` of the attachment."""
    return sa.mean, sa.cov_diag


def sample_attachment(sa: StochasticAttachment, rng_seed: SeedLike) -> AttachmentVector:
    """Draw one attachment: node ``i`` is present with weight ``w_i`` with probability ``p_i``."""
    rng = np.random.default_rng(rng_seed)
    drawn = rng.random(len(sa)) < sa.probs
    return AttachmentVector(len(sa), np.flatnonzero(drawn), sa.weights[drawn])
