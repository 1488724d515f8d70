"""
Hard thresholding P_k and the sparse restricted l2 norm.

P_k keeps the k entries of largest absolute value and zeroes the rest;
ties are broken toward the lowest index so results are reproducible.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class ThresholdedVector:
    """P_k(v) together with its support (sorted indices)."""
    values: np.ndarray
    support: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def top_k_indices(v, k):
    """Indices of the k largest |v_i|, lowest index first among ties."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if k < 1:
        raise InputError(f"k must be positive, got {k}")
    if k >= v.shape[0]:
        return np.arange(v.shape[0])
    # Stable sort on -|v| keeps index order inside ties
    order = np.argsort(-np.abs(v), kind='stable')
    return np.sort(order[:k])


def top_k(v, k):
    """
    Keep the k largest-magnitude entries of v.

    Args:
        v (array-like): Finite real vector.
        k (int): Number of entries to keep, k >= 1. All entries are kept
            when k >= len(v).

    Returns:
        ThresholdedVector
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise InputError("cannot threshold a vector with non-finite entries")
    support = top_k_indices(v, k)
    values = np.zeros_like(v)
    values[support] = v[support]
    return ThresholdedVector(values=values, support=support)


def sparse_restricted_l2(v, s):
    """|P_s(v)|_2, i.e. the max over |S| <= s of |v^S|_2."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if s < 1:
        raise InputError(f"s must be positive, got {s}")
    return float(np.linalg.norm(v[top_k_indices(v, s)]))
