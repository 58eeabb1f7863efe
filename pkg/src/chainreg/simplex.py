"""Simplex weights and clipping shared by every forecaster."""

import numpy as np

from .errors import DimensionError, ParameterError

WEIGHT_SUM_TOL = 1e-9


def uniform_weights(n: int) -> np.ndarray:
    if n < 1:
        raise DimensionError(f"simplex dimension must be >= 1, got {n}")
    return np.full(n, 1.0 / n)


def gibbs_weights(cumulative, eta: float) -> np.ndarray:
    """Weights proportional to ``exp(-eta * cumulative)``.

    The maximum exponent is subtracted before exponentiating, so the result is
    finite for any finite input regardless of magnitude.
    """
    s = np.asarray(cumulative, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DimensionError("cumulative vector must be 1-D and non-empty")
    if not np.all(np.isfinite(s)):
        raise ValueError("cumulative vector has non-finite entries")
    if eta < 0:
        raise ParameterError(f"eta must be >= 0, got {eta}")
    if eta == 0:
        return uniform_weights(s.size)
    z = -eta * s
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def gibbs_rows(cumulative: np.ndarray, eta) -> np.ndarray:
    """Row-wise ``gibbs_weights`` for a 2-D array (one simplex per row).

    ``eta`` may be a scalar or a per-row vector. No validation; hot path.
    """
    z = -np.asarray(eta, dtype=float).reshape(-1, 1) * cumulative
    z -= z.max(axis=1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=1, keepdims=True)


def clip(x, b: float):
    """``min(b, max(-b, x))``; works elementwise on arrays."""
    if b <= 0:
        raise ParameterError(f"clip bound must be > 0, got {b}")
    if np.ndim(x) == 0:
        return min(b, max(-b, float(x)))
    return np.clip(x, -b, b)


def is_simplex_point(w, tol: float = WEIGHT_SUM_TOL) -> bool:
    w = np.asarray(w, dtype=float)
    return bool(w.size >= 1 and np.all(w >= 0) and abs(w.sum() - 1.0) <= tol)
