"""Per-feature z-score standardization: x -> (x - mean) / (sd + eps).

Statistics are the sample mean and sample (n-1) standard deviation of the
fitting split; eps guards constant features against zero division.
Fit on the training split only and apply unchanged elsewhere.
"""

from __future__ import annotations

import json

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .documents import write_text_atomic

EPSILON = 1e-6


class FeatureNormalizer(BaseEstimator, TransformerMixin):
    def __init__(self, epsilon=EPSILON):
        self.epsilon = epsilon

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError("normalizer needs at least 2 vectors to fit")
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0, ddof=1)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / (self.scale_ + self.epsilon)

    def to_dict(self):
        check_is_fitted(self, "mean_")
        return {
            "epsilon": self.epsilon,
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        norm = cls(epsilon=data["epsilon"])
        norm.mean_ = np.asarray(data["mean"], dtype=np.float64)
        norm.scale_ = np.asarray(data["scale"], dtype=np.float64)
        norm.n_features_in_ = len(norm.mean_)
        return norm

    def save(self, path):
        write_text_atomic(path, json.dumps(self.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))
