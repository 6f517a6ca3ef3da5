"""Static regret against a fixed comparator filter, and NRMSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from expanding_graph_filters.models.errors import DimensionError, UndefinedMetricError


@dataclass(frozen=True, eq=False)
class RegretLedger:
    """Per-step online losses next to the comparator's losses on the same steps."""

    online_losses: np.ndarray
    comparator_losses: np.ndarray

    def __post_init__(self):
        online = np.asarray(self.online_losses, dtype=np.float64).ravel()
        comparator = np.asarray(self.comparator_losses, dtype=np.float64).ravel()
        if online.shape != comparator.shape:
            raise DimensionError(f"{online.size} online losses vs {comparator.size} comparator losses")
        object.__setattr__(self, "online_losses", online)
        object.__setattr__(self, "comparator_losses", comparator)

    def __len__(self) -> int:
        return int(self.online_losses.size)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.online_losses - self.comparator_losses)

    @property
    def normalized(self) -> np.ndarray:
        return normalized_regret(self)

    def head(self, steps: int) -> RegretLedger:
        return RegretLedger(self.online_losses[:steps], self.comparator_losses[:steps])


def normalized_regret(ledger: RegretLedger) -> np.ndarray:
    """``(sum of online losses - sum of comparator losses) / t`` for every ``t``."""
    return ledger.cumulative / np.arange(1, len(ledger) + 1)


def comparator_losses(design_rows: np.ndarray, truths: np.ndarray, h_star: np.ndarray, mu: float) -> np.ndarray:
    """Deterministic losses of a fixed filter: ``(g_t^T h - x_t)^2 / 2 + mu ||h||^2``."""
    design_rows = np.atleast_2d(np.asarray(design_rows, dtype=np.float64))
    truths = np.asarray(truths, dtype=np.float64).ravel()
    if design_rows.shape[0] != truths.size:
        raise DimensionError(f"{design_rows.shape[0]} design rows vs {truths.size} truths")
    residuals = design_rows @ h_star - truths
    return 0.5 * residuals**2 + mu * float(h_star @ h_star)


def nrmse(predictions: np.ndarray, truths: np.ndarray) -> float:
    """Root mean squared error divided by the range of the truths."""
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    truths = np.asarray(truths, dtype=np.float64).ravel()
    if predictions.size != truths.size or truths.size == 0:
        raise DimensionError(f"{predictions.size} predictions vs {truths.size} truths")
    spread = float(truths.max() - truths.min())
    if not spread > 0.0:
        raise UndefinedMetricError("NRMSE is undefined for a constant truth vector")
    return float(np.sqrt(np.mean((predictions - truths) ** 2)) / spread)
