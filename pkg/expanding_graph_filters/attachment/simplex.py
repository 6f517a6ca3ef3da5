"""Euclidean projection onto the probability simplex."""

import numpy as np

from expanding_graph_filters.models.errors import DimensionError

SIMPLEX_TOLERANCE = 1e-9


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Project ``v`` onto ``{x >= 0, sum(x) = 1}`` by sort and threshold.

    Sorting is stable on the negated values, so ties keep index order.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size == 0:
        raise DimensionError("Cannot project an empty vector onto the simplex")
    u = v[np.argsort(-v, kind="stable")]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def on_simplex(v: np.ndarray, tol: float = SIMPLEX_TOLERANCE) -> bool:
    v = np.asarray(v, dtype=np.float64)
    return bool(v.size and np.all(v >= -tol) and abs(v.sum() - 1.0) <= tol)
