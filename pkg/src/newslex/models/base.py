"""Shared helpers for the detector estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_features(X, n_features):
    """Validate a 2-D float matrix with the trained feature width."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    return X


def score_to_label(scores):
    """Score threshold rule: fake iff score > 0.5 (a tie means not fake)."""
    return np.asarray(scores) > 0.5


def sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out
