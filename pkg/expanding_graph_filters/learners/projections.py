"""Projection onto the filter-energy ball."""

import numpy as np

from expanding_graph_filters.models.errors import ConfigurationError


def project_ball(h: np.ndarray, radius: float) -> np.ndarray:
    """Radially scale ``h`` onto ``{||h|| <= radius}``; unchanged when already inside."""
    if not radius > 0.0:
        raise ConfigurationError(f"Ball radius must be positive, got {radius}")
    h = np.asarray(h, dtype=np.float64)
    norm = float(np.linalg.norm(h))
    if norm <= radius:
        return h.copy()
    return h * (radius / norm)
